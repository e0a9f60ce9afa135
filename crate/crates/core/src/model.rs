//! Domain types shared by every stage of the pipeline.
//!
//! Everything here is a plain value: serializable to the canonical JSON
//! schema (snake_case field names) and free of provider access.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest accepted article body, in characters.
pub const MAX_ARTICLE_BODY_CHARS: usize = 30_000;

/// Number of highlight colors. Rendering maps indices to actual colors.
pub const PALETTE_SIZE: usize = 6;

/// Milliseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

/// A rule broken by a value, named by the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    pub fn new(field: &str, rule: &str) -> Self {
        Violation { field: field.to_string(), rule: rule.to_string() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub headline: String,
    pub body: String,
    #[serde(default)]
    pub source_url: Option<String>,
    pub ingested_at: Timestamp,
}

impl Article {
    pub fn new(headline: impl Into<String>, body: impl Into<String>, ingested_at: Timestamp) -> Result<Self> {
        let article = Article { headline: headline.into(), body: body.into(), source_url: None, ingested_at };
        article.validate()?;
        Ok(article)
    }

    pub fn with_source_url(mut self, url: impl Into<String>) -> Self {
        self.source_url = Some(url.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.headline.trim().is_empty() {
            violations.push(Violation::new("headline", "must not be empty"));
        }
        if self.body.trim().is_empty() {
            violations.push(Violation::new("body", "must not be empty"));
        }
        if self.body.chars().count() > MAX_ARTICLE_BODY_CHARS {
            violations.push(Violation::new("body", "exceeds 30000 characters"));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub name: String,
    pub activity: String,
}

/// The where/who/what pulled out of an article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsFacts {
    pub setting: String,
    pub stakeholders: Vec<Stakeholder>,
    pub plot_summary: String,
    pub info_points: Vec<String>,
    pub plot_elements: Vec<String>,
}

impl NewsFacts {
    pub const TARGET_STAKEHOLDERS: usize = 5;
    pub const TARGET_INFO_POINTS: usize = 3;
    pub const TARGET_PLOT_ELEMENTS: usize = 4;

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.stakeholders.is_empty() {
            violations.push(Violation::new("stakeholders", "must not be empty"));
        }
        if self.stakeholders.iter().any(|s| s.name.trim().is_empty()) {
            violations.push(Violation::new("stakeholders", "names must not be empty"));
        }
        if self.info_points.is_empty() {
            violations.push(Violation::new("info_points", "must not be empty"));
        }
        if self.plot_elements.is_empty() {
            violations.push(Violation::new("plot_elements", "must not be empty"));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Count mismatches against the requested list sizes. These are warnings,
    /// never errors.
    pub fn count_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let checks = [
            ("stakeholders", self.stakeholders.len(), Self::TARGET_STAKEHOLDERS),
            ("info_points", self.info_points.len(), Self::TARGET_INFO_POINTS),
            ("plot_elements", self.plot_elements.len(), Self::TARGET_PLOT_ELEMENTS),
        ];
        for (field, got, want) in checks {
            if got != want {
                warnings.push(alloc::format!("{field}: expected {want} items, got {got}"));
            }
        }
        warnings
    }
}

/// The three supported narrative framings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framing {
    ExpositoryDialog,
    Reenactment,
    ComedicAnalogy,
}

impl Framing {
    pub const ALL: [Framing; 3] = [Framing::ExpositoryDialog, Framing::Reenactment, Framing::ComedicAnalogy];

    pub const EXPERT: &'static str = "expert";
    pub const NAIVE_NEWCOMER: &'static str = "naive newcomer";
    pub const DOMINANT_STAKEHOLDER: &'static str = "dominant stakeholder";

    /// Role labels of the two principal characters, in order.
    pub fn role_labels(self) -> [&'static str; 2] {
        match self {
            Framing::ExpositoryDialog => [Self::EXPERT, Self::NAIVE_NEWCOMER],
            Framing::Reenactment | Framing::ComedicAnalogy => [Self::DOMINANT_STAKEHOLDER, Self::DOMINANT_STAKEHOLDER],
        }
    }

    /// How many key information points a premise of this framing carries.
    pub fn info_point_count(self) -> usize {
        match self {
            Framing::ExpositoryDialog | Framing::Reenactment => 3,
            Framing::ComedicAnalogy => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Framing::ExpositoryDialog => "expository_dialog",
            Framing::Reenactment => "reenactment",
            Framing::ComedicAnalogy => "comedic_analogy",
        }
    }
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Framing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String =
            s.trim().chars().map(|c| if c == '-' || c == ' ' { '_' } else { c.to_ascii_lowercase() }).collect();
        match key.as_str() {
            "expository_dialog" | "expository" => Ok(Framing::ExpositoryDialog),
            "reenactment" => Ok(Framing::Reenactment),
            "comedic_analogy" | "analogy" => Ok(Framing::ComedicAnalogy),
            _ => Err(Error::invalid("framing", "must be expository_dialog, reenactment, or comedic_analogy")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generated,
    Edited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub name: String,
    pub role_label: String,
}

impl Character {
    pub fn new(name: impl Into<String>, role_label: impl Into<String>) -> Self {
        Character { name: name.into(), role_label: role_label.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Premise {
    pub id: String,
    pub framing: Framing,
    pub characters: Vec<Character>,
    pub plot: String,
    pub setting: String,
    pub info_points: Vec<String>,
    pub provenance: Provenance,
    /// Alternative plots offered alongside the chosen one (comedic analogies).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidate_plots: Vec<String>,
}

impl Premise {
    /// "A and B", the form characters take inside prompts.
    pub fn character_pair(&self) -> String {
        let names: Vec<&str> = self.characters.iter().map(|c| c.name.as_str()).collect();
        crate::prompts::join_and(&names)
    }
}

/// Checks every premise invariant and reports what is broken. Never fails.
pub fn validate_premise(premise: &Premise) -> Vec<Violation> {
    let mut violations = Vec::new();
    if premise.characters.len() != 2 {
        violations.push(Violation::new("characters", "must hold exactly 2 characters"));
    }
    for c in &premise.characters {
        if c.name.trim().is_empty() {
            violations.push(Violation::new("characters.name", "must not be empty"));
        }
        if c.role_label.trim().is_empty() {
            violations.push(Violation::new("characters.role_label", "must not be empty"));
        }
    }
    if premise.framing == Framing::ExpositoryDialog && premise.characters.len() == 2 {
        let mut labels: Vec<&str> = premise.characters.iter().map(|c| c.role_label.as_str()).collect();
        labels.sort_unstable();
        if labels != [Framing::EXPERT, Framing::NAIVE_NEWCOMER] {
            violations.push(Violation::new("role_labels", "must be exactly {expert, naive newcomer}"));
        }
    }
    if premise.plot.trim().is_empty() {
        violations.push(Violation::new("plot", "must not be empty"));
    }
    if premise.setting.trim().is_empty() {
        violations.push(Violation::new("setting", "must not be empty"));
    }
    let want = premise.framing.info_point_count();
    if premise.info_points.len() != want {
        violations.push(Violation::new(
            "info_points",
            if want == 3 { "count must be 3 for this framing" } else { "count must be 4 for this framing" },
        ));
    }
    if premise.info_points.iter().any(|p| p.trim().is_empty()) {
        violations.push(Violation::new("info_points", "entries must not be empty"));
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    WithPremise,
    WithoutPremise,
}

impl core::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "with_premise" => Ok(Condition::WithPremise),
            "without_premise" => Ok(Condition::WithoutPremise),
            _ => Err(Error::invalid("condition", "must be with_premise or without_premise")),
        }
    }
}

/// One block of a screenplay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptLine {
    Dialog {
        speaker: String,
        #[serde(default)]
        parenthetical: Option<String>,
        text: String,
    },
    Direction {
        text: String,
    },
    SceneHeading {
        text: String,
    },
}

impl ScriptLine {
    pub fn dialog(speaker: impl Into<String>, parenthetical: Option<&str>, text: impl Into<String>) -> Self {
        ScriptLine::Dialog {
            speaker: speaker.into(),
            parenthetical: parenthetical.map(|p| p.to_string()),
            text: text.into(),
        }
    }

    pub fn is_dialog(&self) -> bool {
        matches!(self, ScriptLine::Dialog { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScriptLine::Dialog { speaker, parenthetical, .. } => {
                if speaker.trim().is_empty() {
                    return Err(Error::invalid("speaker", "must not be empty"));
                }
                if let Some(p) = parenthetical {
                    if p.starts_with('(') || p.ends_with(')') {
                        return Err(Error::invalid("parenthetical", "stored without enclosing parentheses"));
                    }
                }
                Ok(())
            }
            ScriptLine::Direction { text } => {
                if text.starts_with('[') || text.ends_with(']') {
                    return Err(Error::invalid("direction", "stored without enclosing brackets"));
                }
                Ok(())
            }
            ScriptLine::SceneHeading { .. } => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub id: String,
    #[serde(default)]
    pub premise_id: Option<String>,
    pub framing: Framing,
    pub condition: Condition,
    pub lines: Vec<ScriptLine>,
    pub provenance: Provenance,
    pub starred: bool,
    pub created_at: Timestamp,
}

impl Script {
    pub fn validate(&self) -> Result<()> {
        if self.lines.is_empty() {
            return Err(Error::invalid("lines", "must not be empty"));
        }
        for line in &self.lines {
            line.validate()?;
        }
        Ok(())
    }

    /// Indices (into `lines`) of the dialog lines, in order.
    pub fn dialog_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.lines.iter().enumerate().filter(|(_, l)| l.is_dialog()).map(|(i, _)| i)
    }

    pub fn dialog_count(&self) -> usize {
        self.lines.iter().filter(|l| l.is_dialog()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighlightEntry {
    pub info_point_index: usize,
    pub line_index: usize,
    pub score: f64,
    pub color_index: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HighlightSet {
    pub entries: Vec<HighlightEntry>,
}

impl HighlightSet {
    pub fn for_point(&self, info_point_index: usize) -> Option<&HighlightEntry> {
        self.entries.iter().find(|e| e.info_point_index == info_point_index)
    }
}

/// Content-addressed reference to a stored image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageRef {
    pub digest: String,
    pub media_type: String,
}

impl ImageRef {
    pub fn extension(&self) -> &'static str {
        match self.media_type.as_str() {
            "image/png" => "png",
            "image/jpeg" => "jpg",
            "image/webp" => "webp",
            _ => "bin",
        }
    }

    pub fn file_name(&self) -> String {
        alloc::format!("{}.{}", self.digest, self.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterCard {
    pub character_name: String,
    /// Other names the character goes by in scripts (a named individual
    /// standing in for a group, for instance).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub description: String,
    pub props: Vec<String>,
    pub background_description: String,
    pub background_image_prompt: String,
    #[serde(default)]
    pub portrait_image: Option<ImageRef>,
    #[serde(default)]
    pub background_image: Option<ImageRef>,
}

/// A generation of the character board for one script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterBoard {
    pub generation: u32,
    pub script_id: String,
    pub visual_setting: String,
    pub cards: Vec<CharacterCard>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryboardPanel {
    pub line_index: usize,
    pub speaker: String,
    pub expression: String,
    pub gesture: String,
    pub action: String,
    pub image_prompt: String,
    #[serde(default)]
    pub image: Option<ImageRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storyboard {
    pub script_id: String,
    pub board_generation: u32,
    pub panels: Vec<StoryboardPanel>,
}

/// A partial premise edit. Absent fields keep their current value.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PremisePatch {
    #[serde(default)]
    pub characters: Option<Vec<Character>>,
    #[serde(default)]
    pub plot: Option<String>,
    #[serde(default)]
    pub setting: Option<String>,
    #[serde(default)]
    pub info_points: Option<Vec<String>>,
}

impl Premise {
    /// A new premise carrying `patch`, marked as edited. The original is
    /// left untouched.
    pub fn patched(&self, patch: &PremisePatch, new_id: impl Into<String>) -> Result<Premise> {
        let mut next = self.clone();
        next.id = new_id.into();
        next.provenance = Provenance::Edited;
        if let Some(c) = &patch.characters {
            next.characters = c.clone();
        }
        if let Some(p) = &patch.plot {
            next.plot = p.clone();
        }
        if let Some(s) = &patch.setting {
            next.setting = s.clone();
        }
        if let Some(i) = &patch.info_points {
            next.info_points = i.clone();
        }
        let violations = validate_premise(&next);
        if violations.is_empty() {
            Ok(next)
        } else {
            Err(Error::Validation(violations))
        }
    }
}

impl Script {
    /// A new edited script with `lines`, keeping premise and condition.
    pub fn edited(&self, lines: Vec<ScriptLine>, new_id: impl Into<String>, now: Timestamp) -> Result<Script> {
        let next = Script {
            id: new_id.into(),
            premise_id: self.premise_id.clone(),
            framing: self.framing,
            condition: self.condition,
            lines,
            provenance: Provenance::Edited,
            starred: false,
            created_at: now,
        };
        next.validate()?;
        Ok(next)
    }
}
