//! Prompt assembly.
//!
//! Template text lives in `templates/*.txt`, one file per template, each
//! carrying a small header (id, version, stage) above a `---` line. Slots are
//! written `{name}` and filled verbatim: no re-punctuation, no trimming.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Article, Character, Condition, Framing, NewsFacts, Premise, Script, ScriptLine};
use crate::screenplay;

/// Appended to a list question when the first reply had no list in it.
pub const NUMBERED_LIST_CLARIFIER: &str = "Answer as a numbered list.";

/// Appended to a shot question when the first reply lacked one of the phrases.
pub const SHOT_CLARIFIER: &str = "Answer in the form Expression: [phrase]; Gesture: [phrase]; Action: [phrase].";

macro_rules! templates {
    ($($variant:ident => $file:literal,)*) => {
        /// Every template shipped with the engine.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum TemplateId { $($variant,)* }

        impl TemplateId {
            pub const ALL: &'static [TemplateId] = &[$(TemplateId::$variant,)*];

            pub fn file_name(self) -> &'static str {
                match self { $(TemplateId::$variant => concat!($file, ".txt"),)* }
            }

            /// Raw resource file, header included.
            pub fn source(self) -> &'static str {
                match self { $(TemplateId::$variant => include_str!(concat!("templates/", $file, ".txt")),)* }
            }
        }
    };
}

templates! {
    ExtractionSetting => "extraction_setting",
    ExtractionStakeholders => "extraction_stakeholders",
    ExtractionPlotSummary => "extraction_plot_summary",
    ExtractionInfoPoints => "extraction_info_points",
    ExtractionPlotElements => "extraction_plot_elements",
    PremisePlotExpository => "premise_plot_expository",
    PremisePlotReenactment => "premise_plot_reenactment",
    PremiseCharactersExpository => "premise_characters_expository",
    PremiseCharactersDominant => "premise_characters_dominant",
    PremiseSettingNews => "premise_setting_news",
    PremisePlotAnalogy => "premise_plot_analogy",
    PremiseSettingAnalogy => "premise_setting_analogy",
    FormatCharacters => "format_characters",
    FormatSetting => "format_setting",
    FormatAnalogies => "format_analogies",
    ScriptWithPremise => "script_with_premise",
    ScriptWithoutPremise => "script_without_premise",
    GenericPlotExpository => "generic_plot_expository",
    GenericPlotReenactment => "generic_plot_reenactment",
    GenericPlotAnalogy => "generic_plot_analogy",
    ScriptStyle => "script_style",
    ScriptFormat => "script_format",
    BoardDescriptions => "board_descriptions",
    BoardProps => "board_props",
    BoardVisualSetting => "board_visual_setting",
    BoardBackground => "board_background",
    BoardBackgroundPrompt => "board_background_prompt",
    ImagePortrait => "image_portrait",
    ImageBackground => "image_background",
    StoryboardShot => "storyboard_shot",
    ImageStoryboard => "image_storyboard",
}

/// A parsed template resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: &'static str,
    pub version: u32,
    pub stage: &'static str,
    pub body: &'static str,
}

impl TemplateId {
    pub fn template(self) -> Template {
        let source = self.source();
        let (header, body) = source.split_once("\n---\n").expect("template resource has a header separator");
        let mut id = "";
        let mut version = 0;
        let mut stage = "";
        for line in header.lines() {
            let Some(rest) = line.strip_prefix("# ") else { continue };
            if let Some(v) = rest.strip_prefix("template: ") {
                id = v.trim();
            } else if let Some(v) = rest.strip_prefix("version: ") {
                version = v.trim().parse().expect("numeric template version");
            } else if let Some(v) = rest.strip_prefix("stage: ") {
                stage = v.trim();
            }
        }
        Template { id, version, stage, body: body.strip_suffix('\n').unwrap_or(body) }
    }

    pub fn body(self) -> &'static str {
        self.template().body
    }

    pub fn fill(self, values: &[(&str, &str)]) -> String {
        self.template().fill(values)
    }
}

impl Template {
    /// Slot names in order of appearance.
    pub fn slots(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut rest = self.body;
        while let Some(start) = rest.find('{') {
            let after = &rest[start + 1..];
            let end = after.find('}').expect("unterminated template slot");
            out.push(&after[..end]);
            rest = &after[end + 1..];
        }
        out
    }

    /// Replaces every `{slot}` with its value.
    ///
    /// Panics on a slot without a value; callers build the value list from
    /// the same template, so a miss is a programming error.
    pub fn fill(&self, values: &[(&str, &str)]) -> String {
        let mut out = String::with_capacity(self.body.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
        let mut rest = self.body;
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let after = &rest[start + 1..];
            let end = after.find('}').expect("unterminated template slot");
            let slot = &after[..end];
            let value = values
                .iter()
                .find(|(name, _)| *name == slot)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| panic!("no value for slot `{slot}` in template `{}`", self.id));
            out.push_str(value);
            rest = &after[end + 1..];
        }
        out.push_str(rest);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStep {
    Extraction,
    PremisePlot,
    PremiseCharacters,
    PremiseSetting,
    ScriptGen,
    CharacterBoard,
    Storyboard,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembledPrompt {
    pub step: PromptStep,
    /// Short name of the question, also used as the provider request tag.
    pub name: String,
    pub slot_values: BTreeMap<String, String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptBundle {
    pub prompts: Vec<AssembledPrompt>,
}

impl PromptBundle {
    pub fn get(&self, name: &str) -> Option<&AssembledPrompt> {
        self.prompts.iter().find(|p| p.name == name)
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }
}

fn assembled(step: PromptStep, name: &str, slots: &[(&str, &str)], text: String) -> AssembledPrompt {
    AssembledPrompt {
        step,
        name: name.to_string(),
        slot_values: slots.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        text,
    }
}

/// Joins names as "A", "A and B", or "A, B, and C".
pub fn join_and(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => {
            let mut out = init.join(", ");
            out.push_str(", and ");
            out.push_str(last);
            out
        }
    }
}

/// Headline and body, placed ahead of every extraction, premise and script
/// prompt.
pub fn article_prefix(article: &Article) -> String {
    format!("{}\n\n{}\n\n", article.headline.trim(), article.body.trim())
}

fn with_article(article: &Article, question: &str) -> String {
    let mut text = article_prefix(article);
    text.push_str(question);
    text
}

/// Request tags for the five extraction questions, in prompt order.
pub const EXTRACTION_TAGS: [&str; 5] =
    ["extract.setting", "extract.stakeholders", "extract.plot_summary", "extract.info_points", "extract.plot_elements"];

pub fn build_extraction_prompts(article: &Article) -> Result<PromptBundle> {
    article.validate()?;
    let ids = [
        TemplateId::ExtractionSetting,
        TemplateId::ExtractionStakeholders,
        TemplateId::ExtractionPlotSummary,
        TemplateId::ExtractionInfoPoints,
        TemplateId::ExtractionPlotElements,
    ];
    let prompts = ids
        .iter()
        .zip(EXTRACTION_TAGS)
        .map(|(id, tag)| assembled(PromptStep::Extraction, tag, &[], with_article(article, id.body())))
        .collect();
    Ok(PromptBundle { prompts })
}

/// Stakeholder names as they appear in premise questions.
pub fn news_characters(facts: &NewsFacts) -> String {
    let names: Vec<&str> = facts.stakeholders.iter().map(|s| s.name.as_str()).collect();
    join_and(&names)
}

pub fn premise_characters_prompt(framing: Framing, facts: &NewsFacts, article: &Article) -> AssembledPrompt {
    let characters = news_characters(facts);
    let (question, slots): (String, Vec<(&str, &str)>) = match framing {
        Framing::ExpositoryDialog => {
            let slots = alloc::vec![("news_characters", characters.as_str())];
            (TemplateId::PremiseCharactersExpository.fill(&slots), slots)
        }
        Framing::Reenactment | Framing::ComedicAnalogy => {
            let slots = alloc::vec![
                ("news_characters", characters.as_str()),
                ("news_plot_summary", facts.plot_summary.as_str())
            ];
            (TemplateId::PremiseCharactersDominant.fill(&slots), slots)
        }
    };
    let text = with_article(article, &format!("{question} {}", TemplateId::FormatCharacters.body()));
    assembled(PromptStep::PremiseCharacters, "premise.characters", &slots, text)
}

pub fn analogy_plot_prompt(facts: &NewsFacts, characters: &[Character], article: &Article) -> AssembledPrompt {
    let names: Vec<&str> = characters.iter().map(|c| c.name.as_str()).collect();
    let pair = join_and(&names);
    let slots = [("news_plot_summary", facts.plot_summary.as_str()), ("script_characters", pair.as_str())];
    let question = TemplateId::PremisePlotAnalogy.fill(&slots);
    let text = with_article(article, &format!("{question} {}", TemplateId::FormatAnalogies.body()));
    assembled(PromptStep::PremisePlot, "premise.plot", &slots, text)
}

pub fn premise_setting_prompt(framing: Framing, plot: &str, article: &Article) -> AssembledPrompt {
    let (question, slots): (String, Vec<(&str, &str)>) = match framing {
        Framing::ComedicAnalogy => {
            let slots = alloc::vec![("script_plot", plot)];
            (TemplateId::PremiseSettingAnalogy.fill(&slots), slots)
        }
        _ => (TemplateId::PremiseSettingNews.body().to_string(), Vec::new()),
    };
    let text = with_article(article, &format!("{question} {}", TemplateId::FormatSetting.body()));
    assembled(PromptStep::PremiseSetting, "premise.setting", &slots, text)
}

/// The plot for framings whose plot is not generated.
pub fn fixed_premise_plot(framing: Framing, facts: &NewsFacts) -> Option<String> {
    match framing {
        Framing::ExpositoryDialog => Some(TemplateId::PremisePlotExpository.body().to_string()),
        Framing::Reenactment => {
            Some(TemplateId::PremisePlotReenactment.fill(&[("news_plot_summary", facts.plot_summary.as_str())]))
        }
        Framing::ComedicAnalogy => None,
    }
}

/// Info points copied straight from the extracted facts.
pub fn copied_info_points(framing: Framing, facts: &NewsFacts) -> Vec<String> {
    match framing {
        Framing::ExpositoryDialog | Framing::Reenactment => facts.info_points.clone(),
        Framing::ComedicAnalogy => facts.plot_elements.clone(),
    }
}

/// All premise questions for `framing` whose inputs are known.
///
/// The analogy plot question needs the chosen characters and the analogy
/// setting question needs the chosen plot; each is emitted only once its
/// input is supplied. Plot and info points that are copied from the facts
/// produce no prompt at all.
pub fn build_premise_prompts(
    framing: Framing,
    facts: &NewsFacts,
    article: &Article,
    characters: Option<&[Character]>,
    plot: Option<&str>,
) -> Result<PromptBundle> {
    article.validate()?;
    facts.validate()?;
    let mut prompts = alloc::vec![premise_characters_prompt(framing, facts, article)];
    match framing {
        Framing::ComedicAnalogy => {
            if let Some(chars) = characters {
                prompts.push(analogy_plot_prompt(facts, chars, article));
            }
            if let Some(plot) = plot {
                prompts.push(premise_setting_prompt(framing, plot, article));
            }
        }
        _ => {
            let fixed = fixed_premise_plot(framing, facts).unwrap_or_default();
            prompts.push(premise_setting_prompt(framing, &fixed, article));
        }
    }
    Ok(PromptBundle { prompts })
}

pub fn style_block() -> &'static str {
    TemplateId::ScriptStyle.body()
}

pub fn format_block() -> &'static str {
    TemplateId::ScriptFormat.body()
}

fn generic_plot(framing: Framing) -> &'static str {
    match framing {
        Framing::ExpositoryDialog => TemplateId::GenericPlotExpository.body(),
        Framing::Reenactment => TemplateId::GenericPlotReenactment.body(),
        Framing::ComedicAnalogy => TemplateId::GenericPlotAnalogy.body(),
    }
}

/// The content directive of a script prompt: the part that differs between
/// the two conditions.
pub fn script_content_directive(premise: Option<&Premise>, framing: Framing, condition: Condition) -> Result<String> {
    match condition {
        Condition::WithPremise => {
            let premise =
                premise.ok_or_else(|| Error::invalid("premise", "required for the with-premise condition"))?;
            let violations = crate::model::validate_premise(premise);
            if !violations.is_empty() {
                return Err(Error::Validation(violations));
            }
            let points = premise.info_points.join(" ");
            let pair = premise.character_pair();
            Ok(TemplateId::ScriptWithPremise.fill(&[
                ("script_plot", premise.plot.as_str()),
                ("script_info_points", points.as_str()),
                ("script_characters", pair.as_str()),
                ("script_setting", premise.setting.as_str()),
            ]))
        }
        Condition::WithoutPremise => {
            let framing = premise.map(|p| p.framing).unwrap_or(framing);
            Ok(TemplateId::ScriptWithoutPremise.fill(&[("generic_plot", generic_plot(framing))]))
        }
    }
}

/// Full script prompt: article, content directive, style block, formatting
/// block.
pub fn build_script_prompt(
    premise: Option<&Premise>,
    framing: Framing,
    article: &Article,
    condition: Condition,
) -> Result<String> {
    article.validate()?;
    let content = script_content_directive(premise, framing, condition)?;
    Ok(with_article(article, &format!("{content}\n{}\n{}", style_block(), format_block())))
}

/// Re-ask text for a script reply that could not be parsed.
pub fn script_reask(prompt: &str) -> String {
    format!("{prompt}\n\n{}", format_block())
}

/// Premise as rendered into the background question.
pub fn premise_summary(premise: &Premise) -> String {
    format!("{}, set in {}", premise.plot, premise.setting)
}

/// Questions that build a character board. Later questions take earlier
/// replies as slot values, so each is its own method.
#[derive(Debug, Clone)]
pub struct CharacterBoardPrompts<'a> {
    script_text: String,
    premise: &'a Premise,
}

impl<'a> CharacterBoardPrompts<'a> {
    pub fn new(script: &Script, premise: &'a Premise) -> Result<Self> {
        script.validate()?;
        let violations = crate::model::validate_premise(premise);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(CharacterBoardPrompts { script_text: screenplay::to_raw(&script.lines), premise })
    }

    pub fn descriptions(&self) -> AssembledPrompt {
        let pair = self.premise.character_pair();
        let slots = [
            ("script_plot", self.premise.plot.as_str()),
            ("script", self.script_text.as_str()),
            ("script_characters", pair.as_str()),
        ];
        assembled(PromptStep::CharacterBoard, "board.descriptions", &slots, TemplateId::BoardDescriptions.fill(&slots))
    }

    pub fn props(&self, character_descriptions: &str) -> AssembledPrompt {
        let slots = [("character_descriptions", character_descriptions)];
        assembled(PromptStep::CharacterBoard, "board.props", &slots, TemplateId::BoardProps.fill(&slots))
    }

    pub fn visual_setting(&self) -> AssembledPrompt {
        let slots = [("script", self.script_text.as_str())];
        assembled(
            PromptStep::CharacterBoard,
            "board.visual_setting",
            &slots,
            TemplateId::BoardVisualSetting.fill(&slots),
        )
    }

    pub fn background_description(&self, visual_setting: &str, character_descriptions: &str) -> AssembledPrompt {
        let summary = premise_summary(self.premise);
        let slots = [
            ("visual_setting", visual_setting),
            ("script_premise", summary.as_str()),
            ("character_descriptions", character_descriptions),
        ];
        assembled(PromptStep::CharacterBoard, "board.background", &slots, TemplateId::BoardBackground.fill(&slots))
    }

    pub fn background_image_prompt(&self, visual_setting: &str, background_description: &str) -> AssembledPrompt {
        let slots = [("visual_setting", visual_setting), ("background_description", background_description)];
        assembled(
            PromptStep::CharacterBoard,
            "board.background_prompt",
            &slots,
            TemplateId::BoardBackgroundPrompt.fill(&slots),
        )
    }
}

/// Every character-board prompt for one character, given the replies that
/// feed the dependent questions. Useful for audits.
#[derive(Debug, Clone, Default)]
pub struct BoardReplies<'r> {
    pub character_descriptions: &'r str,
    pub visual_setting: &'r str,
    pub background_description: &'r str,
    pub background_image_prompt: &'r str,
    pub character_description: &'r str,
    pub character_props: &'r str,
}

pub fn build_character_board_prompts(
    script: &Script,
    premise: &Premise,
    replies: &BoardReplies<'_>,
) -> Result<PromptBundle> {
    let kit = CharacterBoardPrompts::new(script, premise)?;
    let portrait_slots =
        [("character_description", replies.character_description), ("character_props", replies.character_props)];
    let background_slots = [("background_image_prompt", replies.background_image_prompt)];
    Ok(PromptBundle {
        prompts: alloc::vec![
            kit.descriptions(),
            kit.props(replies.character_descriptions),
            kit.visual_setting(),
            kit.background_description(replies.visual_setting, replies.character_descriptions),
            kit.background_image_prompt(replies.visual_setting, replies.background_description),
            assembled(
                PromptStep::CharacterBoard,
                "image.portrait",
                &portrait_slots,
                TemplateId::ImagePortrait.fill(&portrait_slots)
            ),
            assembled(
                PromptStep::CharacterBoard,
                "image.background",
                &background_slots,
                TemplateId::ImageBackground.fill(&background_slots)
            ),
        ],
    })
}

pub fn portrait_image_prompt(description: &str, props: &[String]) -> String {
    let props: Vec<&str> = props.iter().map(String::as_str).collect();
    let props = join_and(&props);
    TemplateId::ImagePortrait.fill(&[("character_description", description), ("character_props", props.as_str())])
}

pub fn background_image_prompt(prompt: &str) -> String {
    TemplateId::ImageBackground.fill(&[("background_image_prompt", prompt)])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryboardPrompts {
    pub shot_prompt: String,
    /// Image template with `{character_description}`, `{expression}`,
    /// `{gesture}` and `{action}` slots left open.
    pub image_prompt_template: String,
}

/// A dialog line as it is quoted to the model.
pub fn dialog_line_text(line: &ScriptLine) -> Result<String> {
    match line {
        ScriptLine::Dialog { speaker, text, .. } => Ok(format!("{speaker}: {text}")),
        _ => Err(Error::invalid("line", "must be a dialog line")),
    }
}

pub fn build_storyboard_prompts(line: &ScriptLine) -> Result<StoryboardPrompts> {
    let quoted = dialog_line_text(line)?;
    Ok(StoryboardPrompts {
        shot_prompt: TemplateId::StoryboardShot.fill(&[("script_line", quoted.as_str())]),
        image_prompt_template: TemplateId::ImageStoryboard.body().to_string(),
    })
}

pub fn storyboard_image_prompt(description: &str, expression: &str, gesture: &str, action: &str) -> String {
    TemplateId::ImageStoryboard.fill(&[
        ("character_description", description),
        ("expression", expression),
        ("gesture", gesture),
        ("action", action),
    ])
}
