use newsreel_core::names::{best_match, name_variants};
use newsreel_core::parse::{
    assign_entries, parse_character_descriptions, parse_grouped_list, parse_shot, parse_text, split_props, ShotPhrases,
};
use newsreel_core::prompts::{
    background_image_prompt, build_storyboard_prompts, portrait_image_prompt, storyboard_image_prompt,
    CharacterBoardPrompts, NUMBERED_LIST_CLARIFIER, SHOT_CLARIFIER,
};
use newsreel_core::{
    CharacterBoard, CharacterCard, Error as CoreError, Framing, Premise, Script, ScriptLine, Storyboard,
    StoryboardPanel,
};

use super::{ask, fan_out, with_clarifier};
use crate::error::Result;
use crate::providers::{GeneratedImage, ImageRequest, Providers};

pub const PORTRAIT_TAG: &str = "image.portrait";
pub const BACKGROUND_TAG: &str = "image.background";
pub const SHOT_TAG: &str = "storyboard.shot";
pub const PANEL_TAG: &str = "image.storyboard";

const ROLE_WORDS: [&str; 2] = [Framing::EXPERT, Framing::NAIVE_NEWCOMER];

#[derive(Debug, Clone, PartialEq)]
pub struct BoardOutcome {
    pub board: CharacterBoard,
    pub images: Vec<GeneratedImage>,
    pub raw_replies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoryboardOutcome {
    pub storyboard: Storyboard,
    pub images: Vec<GeneratedImage>,
    pub raw_replies: Vec<String>,
}

/// Every name a card answers to: its own name and its aliases, with
/// parenthetical forms expanded.
pub fn card_variants(card: &CharacterCard) -> Vec<String> {
    let mut out = name_variants(&card.character_name, &ROLE_WORDS);
    for alias in &card.aliases {
        for v in name_variants(alias, &[]) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

struct Described {
    name: String,
    alias: Option<String>,
    description: String,
    variants: Vec<String>,
}

impl Described {
    /// The description as a sentence about the character.
    fn sentence(&self) -> String {
        format!("{} is {}", self.alias.as_deref().unwrap_or(&self.name), self.description)
    }
}

fn parse_props(raw: &str, variants: &[Vec<String>]) -> newsreel_core::Result<Vec<Vec<String>>> {
    let entries = parse_grouped_list(raw);
    assign_entries(&entries, variants)
        .into_iter()
        .map(|e| {
            let props = e.map(|t| split_props(&t)).unwrap_or_default();
            if props.is_empty() {
                Err(CoreError::ParseFailure("a character has no props".into()))
            } else {
                Ok(props)
            }
        })
        .collect()
}

/// One card per premise character: description, props, background and the
/// portrait and background images.
pub fn build_character_board(
    script: &Script,
    premise: &Premise,
    providers: &Providers,
    generation: u32,
) -> Result<BoardOutcome> {
    let kit = CharacterBoardPrompts::new(script, premise)?;
    let mut raw_replies = Vec::new();

    let prompt = kit.descriptions();
    let reask = with_clarifier(&prompt.text, NUMBERED_LIST_CLARIFIER);
    let (described, raw) = ask(providers, &prompt.name, &prompt.text, Some(&reask), |r| {
        parse_character_descriptions(r, &premise.characters)
    })?;
    let descriptions_text = raw.trim().to_string();
    raw_replies.push(raw);
    let described: Vec<Described> = premise
        .characters
        .iter()
        .zip(described)
        .map(|(c, d)| {
            let mut variants = name_variants(&c.name, &ROLE_WORDS);
            if let Some(alias) = &d.alias {
                variants.extend(name_variants(alias, &[]));
            }
            Described { name: c.name.clone(), alias: d.alias, description: d.description, variants }
        })
        .collect();

    let prompt = kit.props(&descriptions_text);
    let reask = with_clarifier(&prompt.text, NUMBERED_LIST_CLARIFIER);
    let variants: Vec<Vec<String>> = described.iter().map(|d| d.variants.clone()).collect();
    let (props, raw) = ask(providers, &prompt.name, &prompt.text, Some(&reask), |r| parse_props(r, &variants))?;
    raw_replies.push(raw);

    let prompt = kit.visual_setting();
    let (visual_setting, raw) = ask(providers, &prompt.name, &prompt.text, None, parse_text)?;
    raw_replies.push(raw);

    let backgrounds = fan_out(providers, &described, |d| {
        let prompt = kit.background_description(&visual_setting, &d.sentence());
        let (description, raw_a) = ask(providers, &prompt.name, &prompt.text, None, parse_text)?;
        let prompt = kit.background_image_prompt(&visual_setting, &description);
        let (image_prompt, raw_b) = ask(providers, &prompt.name, &prompt.text, None, parse_text)?;
        Ok((description, image_prompt, [raw_a, raw_b]))
    })?;

    let mut cards = Vec::new();
    let mut jobs = Vec::new();
    for ((d, props), (background_description, background_prompt, raws)) in
        described.into_iter().zip(props).zip(backgrounds)
    {
        raw_replies.extend(raws);
        jobs.push(ImageRequest::new(PORTRAIT_TAG, portrait_image_prompt(&d.description, &props)));
        jobs.push(ImageRequest::new(BACKGROUND_TAG, background_image_prompt(&background_prompt)));
        cards.push(CharacterCard {
            character_name: d.name,
            aliases: d.alias.into_iter().collect(),
            description: d.description,
            props,
            background_description,
            background_image_prompt: background_prompt,
            portrait_image: None,
            background_image: None,
        });
    }
    let images = fan_out(providers, &jobs, |job| providers.generate_image(job))?;
    for (card, pair) in cards.iter_mut().zip(images.chunks(2)) {
        card.portrait_image = Some(pair[0].image_ref());
        card.background_image = Some(pair[1].image_ref());
    }
    let board = CharacterBoard { generation, script_id: script.id.clone(), visual_setting, cards };
    Ok(BoardOutcome { board, images, raw_replies })
}

/// The card index for every dialog line, in line order. Fails on the first
/// speaker that matches no card or more than one equally well.
pub fn match_speakers(script: &Script, board: &CharacterBoard) -> Result<Vec<(usize, usize)>> {
    let candidates: Vec<Vec<String>> = board.cards.iter().map(card_variants).collect();
    script
        .lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            ScriptLine::Dialog { speaker, .. } => Some((i, speaker)),
            _ => None,
        })
        .map(|(i, speaker)| {
            best_match(speaker, &candidates)
                .map(|card| (i, card))
                .ok_or_else(|| CoreError::UnknownSpeaker { line_index: i, speaker: speaker.clone() }.into())
        })
        .collect()
}

/// Expression, gesture and action for one dialog line.
pub fn describe_shot(line: &ScriptLine, providers: &Providers) -> Result<(ShotPhrases, String)> {
    let prompts = build_storyboard_prompts(line)?;
    let reask = with_clarifier(&prompts.shot_prompt, SHOT_CLARIFIER);
    ask(providers, SHOT_TAG, &prompts.shot_prompt, Some(&reask), parse_shot)
}

/// One panel per dialog line, drawn with the speaker's card description.
pub fn build_storyboard(script: &Script, board: &CharacterBoard, providers: &Providers) -> Result<StoryboardOutcome> {
    let matched = match_speakers(script, board)?;
    let results = fan_out(providers, &matched, |&(line_index, card_index)| {
        let line = &script.lines[line_index];
        let (shot, raw) = describe_shot(line, providers)?;
        let card = &board.cards[card_index];
        let image_prompt = storyboard_image_prompt(&card.description, &shot.expression, &shot.gesture, &shot.action);
        let image = providers.generate_image(&ImageRequest::new(PANEL_TAG, image_prompt.clone()))?;
        let speaker = match line {
            ScriptLine::Dialog { speaker, .. } => speaker.clone(),
            _ => String::new(),
        };
        let panel = StoryboardPanel {
            line_index,
            speaker,
            expression: shot.expression,
            gesture: shot.gesture,
            action: shot.action,
            image_prompt,
            image: Some(image.image_ref()),
        };
        Ok((panel, image, raw))
    })?;
    let mut panels = Vec::new();
    let mut images = Vec::new();
    let mut raw_replies = Vec::new();
    for (panel, image, raw) in results {
        panels.push(panel);
        images.push(image);
        raw_replies.push(raw);
    }
    let storyboard = Storyboard { script_id: script.id.clone(), board_generation: board.generation, panels };
    Ok(StoryboardOutcome { storyboard, images, raw_replies })
}
