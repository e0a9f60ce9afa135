//! Scripted providers and fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use newsreel::core::digest::sha256_hex;
use newsreel::core::{Article, Timestamp};
use newsreel::providers::{
    Backends, CompletionBackend, CompletionRequest, EmbeddingBackend, GeneratedImage, ImageBackend, ImageRequest,
};
use newsreel::{Error, Result};

pub const REFERENCE_PLOT: &str =
    "The credit union is like the pastry chef, and consumers are hungry customers waiting in line for chip-enabled cookies";
pub const REFERENCE_SETTING: &str = "A busy bakery";
pub const ISSUERS: &str = "Credit and debit card issuers (particularly credit unions)";
pub const CONSUMERS: &str = "Consumers (like Ed Delaney)";
pub const CREDIT_UNION_DESCRIPTION: &str =
    "a woman in her mid-thirties who wears a navy blue skirt suit and looks professional";
pub const CREDIT_UNION_BACKGROUND: &str =
    "credit union office; sitting at the desk of the customer service area, with modern chairs and a few plants behind her";

pub const REFERENCE_INFO_POINTS: [&str; 3] = [
    "The global chip shortage is causing major delays in delivering credit and debit cards.",
    "Semiconductor demand has spiked during the pandemic, leading to long lead times for chip production, averaging 20-25 weeks.",
    "Competition from other industries has kicked the credit card sector to the bottom of the priority pile.",
];

pub const REFERENCE_PLOT_POINTS: [&str; 4] = [
    "The global chip shortage is causing delays in issuing debit and credit cards, with some consumers experiencing wait times of six weeks or more.",
    "Credit union members seem to be particularly affected, with typical time for card issuance stretching from five to 10 days to weeks or even months.",
    "Experts predicted that the delays in card deliveries will continue throughout 2023 despite projections of 3 billion cards being manufactured this year.",
    "The chip shortage results from high demand, limited production facilities, and competition...",
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub fn read_fixture(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn cassette_path() -> PathBuf {
    fixture("credit_card_cassette/cassette.json")
}

pub fn credit_card_article() -> Article {
    newsreel::cli::read_article(&fixture("credit_card.txt"), Timestamp(0)).unwrap()
}

/// Reference script fixtures by framing name.
pub fn reference_script(framing: &str) -> String {
    read_fixture(&format!("scripts/reference_{framing}.txt"))
}

/// The ten raw scripts of the round-trip corpus, by file name.
pub fn script_corpus() -> Vec<(String, String)> {
    let mut names: Vec<String> = fs::read_dir(fixture("scripts"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), read_fixture(&format!("scripts/{n}")))).collect()
}

type ReplyFn = dyn Fn(&CompletionRequest) -> Option<String> + Send + Sync;

/// A completion backend that answers from a function; `None` surfaces as
/// an unavailable provider.
pub struct Scripted {
    reply: Box<ReplyFn>,
    pub calls: AtomicUsize,
}

impl Scripted {
    pub fn new(reply: impl Fn(&CompletionRequest) -> Option<String> + Send + Sync + 'static) -> Self {
        Scripted { reply: Box::new(reply), calls: AtomicUsize::new(0) }
    }
}

impl CompletionBackend for Scripted {
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.reply)(request)
            .ok_or_else(|| Error::ProviderUnavailable(format!("no scripted reply for `{}`", request.request_tag)))
    }
}

/// A tiny grayscale PNG whose pixels are a function of `seed`.
pub fn png_bytes(seed: &str) -> Vec<u8> {
    let digest = sha256_hex(seed.as_bytes());
    let pixels: Vec<u8> = digest.bytes().cycle().take(16 * 16).collect();
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, 16, 16);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().unwrap();
    writer.write_image_data(&pixels).unwrap();
    writer.finish().unwrap();
    out
}

pub struct PromptImages;

impl ImageBackend for PromptImages {
    fn generate(&self, request: &ImageRequest) -> Result<GeneratedImage> {
        Ok(GeneratedImage { bytes: png_bytes(&request.prompt), media_type: "image/png".into() })
    }
}

/// Hashed bag of words: 64 buckets of lowercase word counts.
pub struct BagOfWords;

impl EmbeddingBackend for BagOfWords {
    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; 64];
        for word in text.split(|c: char| !c.is_alphanumeric()).filter(|w| w.len() > 2) {
            let h = sha256_hex(word.to_lowercase().as_bytes());
            let bucket = usize::from_str_radix(&h[..4], 16).unwrap() % 64;
            v[bucket] += 1.0;
        }
        Ok(v)
    }
}

fn numbered(items: &[&str]) -> String {
    items.iter().enumerate().map(|(i, s)| format!("{}. {s}", i + 1)).collect::<Vec<_>>().join("\n")
}

const SHOTS: [&str; 4] = [
    "Expression: wide-eyed; Gesture: hands on the counter; Action: leaning forward",
    "Expression: apologetic smile; Gesture: shrugging; Action: pointing at an empty tray",
    "Expression: exasperated; Gesture: arms crossed; Action: tapping a foot",
    "Expression: nervous grin; Gesture: wiping hands on an apron; Action: glancing at the oven",
];

/// Replies consistent with the reference credit-card example, for every
/// pipeline step and all three framings.
pub fn credit_card_reply(request: &CompletionRequest) -> Option<String> {
    let p = request.prompt.as_str();
    let reply = match request.request_tag.as_str() {
        "extract.setting" => "Setting: The United States, at credit unions and banks issuing debit and credit cards.".into(),
        "extract.stakeholders" => numbered(&[
            "Ed Delaney — tried to get a replacement debit card issued and waited six weeks",
            "Credit unions — told members that new cards were delayed by the chip shortage",
            "Card manufacturers — ran short of the chips that go into credit and debit cards",
            "Patrick Penfield — explained as a supply chain professor why chip lead times grew",
            "Chip makers — served automakers and electronics companies ahead of card makers",
        ]),
        "extract.plot_summary" => "The global chip shortage is affecting credit and debit card issuers, particularly credit unions, causing delays of weeks or even months in consumer card delivery times".into(),
        "extract.info_points" => numbered(&REFERENCE_INFO_POINTS),
        "extract.plot_elements" => numbered(&REFERENCE_PLOT_POINTS),
        "premise.characters" if p.contains("expert and naive newcomer") => {
            "Characters: Supply chain experts (like professor Patrick Penfield, expert); Consumers (like Ed Delaney, naive newcomer)".into()
        }
        "premise.characters" => format!("Characters: {ISSUERS}; {CONSUMERS}"),
        "premise.plot" => numbered(&[
            REFERENCE_PLOT,
            "The credit union is a car wash out of soap, and consumers are drivers with muddy cars",
            "The credit union is a ticket booth out of tickets, and consumers are fans missing the game",
        ]),
        "premise.setting" if p.contains("analogous premise") => format!("Setting: {REFERENCE_SETTING}."),
        "premise.setting" => "Setting: A credit union office".into(),
        "script.generate" if p.contains("pastry chef") || p.contains("a comedic analogy") => reference_script("comedic_analogy"),
        "script.generate" if p.contains("(expert)") => reference_script("expository"),
        "script.generate" => reference_script("reenactment"),
        "board.descriptions" if p.contains("PATRICK PENFIELD") => numbered(&[
            "Patrick Penfield is a man in his fifties who wears a tweed jacket and reading glasses.",
            "Ed Delaney is a man in his forties who wears a gray hoodie and jeans.",
        ]),
        "board.descriptions" => numbered(&[
            &format!("Credit Union is {CREDIT_UNION_DESCRIPTION}."),
            "Ed Delaney is a man in his forties who wears a gray hoodie and jeans.",
        ]),
        "board.props" if p.contains("Patrick Penfield") => numbered(&[
            "Patrick Penfield: tweed jacket, reading glasses, coffee mug, and a stack of papers",
            "Ed Delaney: gray hoodie, baseball cap, empty wallet, and kitchen timer",
        ]),
        "board.props" => numbered(&[
            "Credit Union: navy blue skirt suit, business briefcase, notebook, and pen",
            "Ed Delaney: gray hoodie, baseball cap, empty wallet, and kitchen timer",
        ]),
        "board.visual_setting" => "A busy neighborhood bakery that doubles as a credit union branch".into(),
        "board.background" if p.contains("Credit Union is") => CREDIT_UNION_BACKGROUND.into(),
        "board.background" if p.contains("Patrick Penfield is") => {
            "factory floor; standing beside a wafer inspection station with blinking machines behind him".into()
        }
        "board.background" => "customer line; standing at the front of the queue with a glass display case behind him".into(),
        "board.background_prompt" if p.contains("customer service") => {
            "A credit union customer service desk with modern chairs and a few potted plants".into()
        }
        "board.background_prompt" if p.contains("wafer") => "A chip factory floor with inspection machines".into(),
        "board.background_prompt" => "A bakery queue in front of a glass display case of cookies".into(),
        "storyboard.shot" => {
            let i = usize::from_str_radix(&sha256_hex(p.as_bytes())[..2], 16).unwrap() % SHOTS.len();
            SHOTS[i].into()
        }
        _ => return None,
    };
    Some(reply)
}

pub fn credit_card_backends() -> Backends {
    Backends {
        completion: Some(Arc::new(Scripted::new(credit_card_reply))),
        image: Some(Arc::new(PromptImages)),
        embedding: Some(Arc::new(BagOfWords)),
    }
}

/// Copies every regular file under `dir` into a sorted list of
/// (relative path, bytes).
pub fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Live providers on the scripted credit-card backends, with a logical
/// clock so timestamps repeat.
pub fn scripted_providers() -> newsreel::providers::Providers {
    newsreel::providers::Providers::new(newsreel::providers::Mode::Live, credit_card_backends(), None)
        .unwrap()
        .with_clock(Arc::new(newsreel::clock::Clock::logical()))
}

/// A project taken through every stage with the comedic framing.
pub fn full_project(
    providers: &newsreel::providers::Providers,
    blobs: &dyn newsreel::blobs::BlobStore,
) -> newsreel::core::Project {
    use newsreel::core::{Condition, Framing};
    use newsreel::session::{HighlightOptions, Session};
    let session = Session::new(providers, blobs);
    let mut project = session.create_project(credit_card_article()).unwrap();
    session.extract(&mut project).unwrap();
    session.generate_premise(&mut project, Framing::ComedicAnalogy).unwrap();
    session.generate_script(&mut project, Condition::WithPremise, None, None).unwrap();
    session.assign_highlights(&mut project, HighlightOptions::default()).unwrap();
    session.build_character_board(&mut project).unwrap();
    session.build_storyboard(&mut project).unwrap();
    project
}

/// Scripted live providers answering from `reply`, with the usual image
/// and embedding stand-ins.
pub fn providers_with(
    reply: impl Fn(&CompletionRequest) -> Option<String> + Send + Sync + 'static,
) -> newsreel::providers::Providers {
    let backends = Backends {
        completion: Some(Arc::new(Scripted::new(reply))),
        image: Some(Arc::new(PromptImages)),
        embedding: Some(Arc::new(BagOfWords)),
    };
    newsreel::providers::Providers::new(newsreel::providers::Mode::Live, backends, None)
        .unwrap()
        .with_clock(Arc::new(newsreel::clock::Clock::logical()))
}
