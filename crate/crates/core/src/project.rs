//! The project aggregate: an append-only event log and the state it folds
//! into.
//!
//! Every mutation is an [`ProjectEvent`] checked against the workflow stage
//! before it is applied. Replaying the log from scratch reproduces the
//! project exactly.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::digest::{json_digest, sha256_hex};
use crate::error::{Error, Result};
use crate::highlight::HighlightConfig;
use crate::model::{
    validate_premise, Article, CharacterBoard, Condition, HighlightSet, NewsFacts, Premise, Provenance, Script,
    Storyboard, Timestamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Article,
    Extracted,
    PremiseReady,
    ScriptActive,
    BoardReady,
    StoryboardReady,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Article,
        Stage::Extracted,
        Stage::PremiseReady,
        Stage::ScriptActive,
        Stage::BoardReady,
        Stage::StoryboardReady,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Article => "article",
            Stage::Extracted => "extracted",
            Stage::PremiseReady => "premise_ready",
            Stage::ScriptActive => "script_active",
            Stage::BoardReady => "board_ready",
            Stage::StoryboardReady => "storyboard_ready",
        }
    }
}

impl core::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s.trim())
            .ok_or_else(|| Error::invalid("stage", "unknown stage"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageAction {
    CreateProject,
    Extract,
    GeneratePremise,
    EditPremise,
    GenerateScript,
    EditScript,
    StarScript,
    SelectScript,
    AssignHighlights,
    BuildCharacterBoard,
    BuildStoryboard,
    RevertStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Human,
    Machine,
}

/// Highlights computed for one script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightRecord {
    pub script_id: String,
    pub info_points: Vec<String>,
    pub config: HighlightConfig,
    pub set: HighlightSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProjectEvent {
    Created {
        project_id: String,
        article: Article,
    },
    FactsExtracted {
        facts: NewsFacts,
        raw_replies: Vec<String>,
        #[serde(default)]
        warnings: Vec<String>,
    },
    PremiseAdded {
        premise: Premise,
        #[serde(default)]
        warnings: Vec<String>,
    },
    ScriptAdded {
        script: Script,
        #[serde(default)]
        raw: Option<String>,
        #[serde(default)]
        warnings: Vec<String>,
    },
    ScriptStarred {
        script_id: String,
        starred: bool,
    },
    ActiveScriptSelected {
        script_id: String,
    },
    HighlightsAssigned {
        record: HighlightRecord,
    },
    CharacterBoardBuilt {
        board: CharacterBoard,
    },
    StoryboardBuilt {
        storyboard: Storyboard,
    },
    StageReverted {
        stage: Stage,
    },
}

impl ProjectEvent {
    pub fn action(&self) -> StageAction {
        match self {
            ProjectEvent::Created { .. } => StageAction::CreateProject,
            ProjectEvent::FactsExtracted { .. } => StageAction::Extract,
            ProjectEvent::PremiseAdded { premise, .. } => match premise.provenance {
                Provenance::Generated => StageAction::GeneratePremise,
                Provenance::Edited => StageAction::EditPremise,
            },
            ProjectEvent::ScriptAdded { script, .. } => match script.provenance {
                Provenance::Generated => StageAction::GenerateScript,
                Provenance::Edited => StageAction::EditScript,
            },
            ProjectEvent::ScriptStarred { .. } => StageAction::StarScript,
            ProjectEvent::ActiveScriptSelected { .. } => StageAction::SelectScript,
            ProjectEvent::HighlightsAssigned { .. } => StageAction::AssignHighlights,
            ProjectEvent::CharacterBoardBuilt { .. } => StageAction::BuildCharacterBoard,
            ProjectEvent::StoryboardBuilt { .. } => StageAction::BuildStoryboard,
            ProjectEvent::StageReverted { .. } => StageAction::RevertStage,
        }
    }

    /// Who normally originates this kind of event.
    pub fn default_actor(&self) -> Actor {
        match self.action() {
            StageAction::Extract
            | StageAction::GeneratePremise
            | StageAction::GenerateScript
            | StageAction::AssignHighlights
            | StageAction::BuildCharacterBoard
            | StageAction::BuildStoryboard => Actor::Machine,
            _ => Actor::Human,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub actor: Actor,
    pub action: StageAction,
    pub payload_digest: String,
    pub event: ProjectEvent,
}

/// Which downstream artifacts no longer reflect their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Staleness {
    pub character_board: bool,
    pub storyboard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    pub article: Article,
    pub stage: Stage,
    #[serde(default)]
    pub news_facts: Option<NewsFacts>,
    #[serde(default)]
    pub premises: Vec<Premise>,
    #[serde(default)]
    pub scripts: Vec<Script>,
    #[serde(default)]
    pub active_script_id: Option<String>,
    #[serde(default)]
    pub highlights: Vec<HighlightRecord>,
    #[serde(default)]
    pub character_board: Option<CharacterBoard>,
    #[serde(default)]
    pub storyboard: Option<Storyboard>,
    pub event_log: Vec<EventRecord>,
}

/// Deterministic project id from the article and creation time.
pub fn project_id(article: &Article, created_at: Timestamp) -> String {
    let seed = format!("{}\n{}\n{}", article.headline, article.body, created_at.0);
    let hex = sha256_hex(seed.as_bytes());
    format!("p-{}", &hex[..12])
}

impl Project {
    pub fn create(article: Article, now: Timestamp) -> Result<Project> {
        article.validate()?;
        let project_id = project_id(&article, now);
        let event = ProjectEvent::Created { project_id: project_id.clone(), article: article.clone() };
        let mut project = Project {
            id: project_id,
            article,
            stage: Stage::Article,
            news_facts: None,
            premises: Vec::new(),
            scripts: Vec::new(),
            active_script_id: None,
            highlights: Vec::new(),
            character_board: None,
            storyboard: None,
            event_log: Vec::new(),
        };
        project.event_log.push(EventRecord {
            seq: 0,
            timestamp: now,
            actor: Actor::Human,
            action: StageAction::CreateProject,
            payload_digest: json_digest(&event),
            event,
        });
        Ok(project)
    }

    /// Rebuilds a project by folding its log.
    pub fn replay(log: &[EventRecord]) -> Result<Project> {
        let (first, rest) = log.split_first().ok_or_else(|| Error::invalid("event_log", "must not be empty"))?;
        let ProjectEvent::Created { project_id, article } = &first.event else {
            return Err(Error::invalid("event_log", "must start with a created event"));
        };
        let mut project = Project::create(article.clone(), first.timestamp)?;
        if &project.id != project_id {
            return Err(Error::invalid("event_log", "project id does not match its article"));
        }
        project.event_log[0] = first.clone();
        project.check_record(first, 0)?;
        for (i, record) in rest.iter().enumerate() {
            project.check_record(record, i as u64 + 1)?;
            project.apply(&record.event)?;
            project.event_log.push(record.clone());
        }
        Ok(project)
    }

    fn check_record(&self, record: &EventRecord, seq: u64) -> Result<()> {
        if record.seq != seq {
            return Err(Error::invalid("event_log", "sequence numbers must count up from zero"));
        }
        if record.payload_digest != json_digest(&record.event) {
            return Err(Error::invalid("event_log", "payload digest does not match event"));
        }
        if record.action != record.event.action() {
            return Err(Error::invalid("event_log", "action does not match event"));
        }
        if let Some(prev) = seq.checked_sub(1).and_then(|p| self.event_log.get(p as usize)) {
            if record.timestamp < prev.timestamp {
                return Err(Error::invalid("event_log", "timestamps must not decrease"));
            }
        }
        Ok(())
    }

    /// Applies `event` and appends it to the log. Timestamps earlier than the
    /// last entry are clamped forward so the log stays monotonic.
    pub fn record(&mut self, event: ProjectEvent, actor: Actor, now: Timestamp) -> Result<&EventRecord> {
        self.apply(&event)?;
        let last = self.event_log.last().map_or(now, |r| r.timestamp);
        let record = EventRecord {
            seq: self.event_log.len() as u64,
            timestamp: if now < last { last } else { now },
            actor,
            action: event.action(),
            payload_digest: json_digest(&event),
            event,
        };
        self.event_log.push(record);
        Ok(self.event_log.last().expect("just pushed"))
    }

    fn require(&self, at_least: Stage, action: StageAction) -> Result<()> {
        if self.stage >= at_least {
            Ok(())
        } else {
            Err(Error::StageViolation { stage: self.stage, action })
        }
    }

    /// The minimum stage `action` needs. Callers check this before doing
    /// expensive work; `apply` enforces it again.
    pub fn check_stage(&self, action: StageAction) -> Result<()> {
        match action {
            StageAction::GeneratePremise | StageAction::EditPremise => self.require(Stage::Extracted, action),
            StageAction::AssignHighlights | StageAction::BuildCharacterBoard => {
                self.require(Stage::ScriptActive, action)
            }
            StageAction::BuildStoryboard => {
                self.require(Stage::BoardReady, action)?;
                self.character_board.as_ref().map(|_| ()).ok_or(Error::StageViolation { stage: self.stage, action })
            }
            _ => Ok(()),
        }
    }

    /// Checks `event` against the current state, then folds it in. Nothing is
    /// mutated when a check fails.
    pub fn apply(&mut self, event: &ProjectEvent) -> Result<()> {
        let action = event.action();
        match event {
            ProjectEvent::Created { .. } => Err(Error::invalid("event", "project already created")),
            ProjectEvent::FactsExtracted { facts, .. } => {
                facts.validate()?;
                self.news_facts = Some(facts.clone());
                self.stage = Stage::Extracted;
                Ok(())
            }
            ProjectEvent::PremiseAdded { premise, .. } => {
                self.require(Stage::Extracted, action)?;
                let violations = validate_premise(premise);
                if !violations.is_empty() {
                    return Err(Error::Validation(violations));
                }
                if self.premise(&premise.id).is_some() {
                    return Err(Error::invalid("premise.id", "already used"));
                }
                self.premises.push(premise.clone());
                self.stage = Stage::PremiseReady;
                Ok(())
            }
            ProjectEvent::ScriptAdded { script, .. } => {
                script.validate()?;
                if self.script(&script.id).is_some() {
                    return Err(Error::invalid("script.id", "already used"));
                }
                match (script.condition, &script.premise_id) {
                    (Condition::WithPremise, None) => {
                        self.require(Stage::PremiseReady, action)?;
                        return Err(Error::invalid("premise_id", "required for the with-premise condition"));
                    }
                    (Condition::WithPremise, Some(pid)) => {
                        self.require(Stage::PremiseReady, action)?;
                        if self.premise(pid).is_none() {
                            return Err(Error::UnknownPremise(pid.clone()));
                        }
                    }
                    (Condition::WithoutPremise, Some(_)) => {
                        return Err(Error::invalid("premise_id", "must be absent for the without-premise condition"));
                    }
                    (Condition::WithoutPremise, None) => {}
                }
                self.scripts.push(script.clone());
                self.active_script_id = Some(script.id.clone());
                self.stage = Stage::ScriptActive;
                Ok(())
            }
            ProjectEvent::ScriptStarred { script_id, starred } => {
                let script = self.script_mut(script_id)?;
                script.starred = *starred;
                Ok(())
            }
            ProjectEvent::ActiveScriptSelected { script_id } => {
                self.script(script_id).ok_or_else(|| Error::UnknownScript(script_id.clone()))?;
                self.active_script_id = Some(script_id.clone());
                self.stage = Stage::ScriptActive;
                Ok(())
            }
            ProjectEvent::HighlightsAssigned { record } => {
                self.require(Stage::ScriptActive, action)?;
                let script =
                    self.script(&record.script_id).ok_or_else(|| Error::UnknownScript(record.script_id.clone()))?;
                record.config.validate()?;
                for entry in &record.set.entries {
                    let on_dialog = script.lines.get(entry.line_index).is_some_and(|l| l.is_dialog());
                    if !on_dialog || entry.info_point_index >= record.info_points.len() {
                        return Err(Error::invalid(
                            "highlights",
                            "entries must point at dialog lines and known info points",
                        ));
                    }
                }
                self.highlights.retain(|h| h.script_id != record.script_id);
                self.highlights.push(record.clone());
                Ok(())
            }
            ProjectEvent::CharacterBoardBuilt { board } => {
                self.require(Stage::ScriptActive, action)?;
                if self.active_script_id.as_deref() != Some(board.script_id.as_str()) {
                    return Err(Error::invalid("board.script_id", "must be the active script"));
                }
                if board.generation != self.next_board_generation() {
                    return Err(Error::invalid("board.generation", "must follow the previous generation"));
                }
                if board.cards.is_empty() {
                    return Err(Error::invalid("board.cards", "must not be empty"));
                }
                self.character_board = Some(board.clone());
                self.stage = Stage::BoardReady;
                Ok(())
            }
            ProjectEvent::StoryboardBuilt { storyboard } => {
                self.require(Stage::BoardReady, action)?;
                let board = self.character_board.as_ref().ok_or(Error::StageViolation { stage: self.stage, action })?;
                if storyboard.board_generation != board.generation || storyboard.script_id != board.script_id {
                    return Err(Error::invalid("storyboard", "must reference the current board"));
                }
                let script = self
                    .script(&storyboard.script_id)
                    .ok_or_else(|| Error::UnknownScript(storyboard.script_id.clone()))?;
                let dialog: Vec<usize> = script.dialog_indices().collect();
                let panels: Vec<usize> = storyboard.panels.iter().map(|p| p.line_index).collect();
                if dialog != panels {
                    return Err(Error::invalid("storyboard.panels", "must cover every dialog line in order"));
                }
                self.storyboard = Some(storyboard.clone());
                self.stage = Stage::StoryboardReady;
                Ok(())
            }
            ProjectEvent::StageReverted { stage } => {
                if *stage > self.stage {
                    return Err(Error::StageViolation { stage: self.stage, action });
                }
                self.stage = *stage;
                Ok(())
            }
        }
    }

    pub fn premise(&self, id: &str) -> Option<&Premise> {
        self.premises.iter().find(|p| p.id == id)
    }

    pub fn script(&self, id: &str) -> Option<&Script> {
        self.scripts.iter().find(|s| s.id == id)
    }

    fn script_mut(&mut self, id: &str) -> Result<&mut Script> {
        self.scripts.iter_mut().find(|s| s.id == id).ok_or_else(|| Error::UnknownScript(id.to_string()))
    }

    pub fn active_script(&self) -> Option<&Script> {
        self.active_script_id.as_deref().and_then(|id| self.script(id))
    }

    pub fn latest_premise(&self) -> Option<&Premise> {
        self.premises.last()
    }

    pub fn highlights_for(&self, script_id: &str) -> Option<&HighlightRecord> {
        self.highlights.iter().find(|h| h.script_id == script_id)
    }

    /// All scripts ordered by creation time (stable for equal times).
    pub fn history(&self) -> Vec<&Script> {
        let mut out: Vec<&Script> = self.scripts.iter().collect();
        out.sort_by_key(|s| s.created_at);
        out
    }

    pub fn next_premise_id(&self) -> String {
        format!("premise-{:03}", self.premises.len() + 1)
    }

    pub fn next_script_id(&self) -> String {
        format!("script-{:03}", self.scripts.len() + 1)
    }

    pub fn next_board_generation(&self) -> u32 {
        self.character_board.as_ref().map_or(1, |b| b.generation + 1)
    }

    /// The event that flips a script's star.
    pub fn toggle_star(&self, script_id: &str) -> Result<ProjectEvent> {
        let script = self.script(script_id).ok_or_else(|| Error::UnknownScript(script_id.to_string()))?;
        Ok(ProjectEvent::ScriptStarred { script_id: script_id.to_string(), starred: !script.starred })
    }

    pub fn staleness(&self) -> Staleness {
        let board_stale = match &self.character_board {
            Some(board) => {
                self.stage < Stage::BoardReady || self.active_script_id.as_deref() != Some(board.script_id.as_str())
            }
            None => false,
        };
        let storyboard_stale = match (&self.storyboard, &self.character_board) {
            (Some(sb), Some(board)) => {
                board_stale || self.stage < Stage::StoryboardReady || sb.board_generation != board.generation
            }
            (Some(_), None) => true,
            (None, _) => false,
        };
        Staleness { character_board: board_stale, storyboard: storyboard_stale }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CharacterCard, Framing, ScriptLine, StoryboardPanel};
    use alloc::vec;

    fn article() -> Article {
        Article::new("Card delays", "A global chip shortage delays credit cards.", Timestamp(1_000)).unwrap()
    }

    fn facts() -> NewsFacts {
        NewsFacts {
            setting: "credit unions".into(),
            stakeholders: vec![crate::model::Stakeholder { name: "Ed Delaney".into(), activity: "waiting".into() }],
            plot_summary: "cards are late".into(),
            info_points: vec!["a".into(), "b".into(), "c".into()],
            plot_elements: vec!["w".into(), "x".into(), "y".into(), "z".into()],
        }
    }

    fn premise(id: &str) -> Premise {
        Premise {
            id: id.into(),
            framing: Framing::Reenactment,
            characters: vec![
                crate::model::Character::new("Ed Delaney", Framing::DOMINANT_STAKEHOLDER),
                crate::model::Character::new("Credit Union", Framing::DOMINANT_STAKEHOLDER),
            ],
            plot: "acting it out".into(),
            setting: "credit union".into(),
            info_points: vec!["a".into(), "b".into(), "c".into()],
            provenance: Provenance::Generated,
            candidate_plots: vec![],
        }
    }

    fn script(id: &str, premise_id: Option<&str>) -> Script {
        Script {
            id: id.into(),
            premise_id: premise_id.map(Into::into),
            framing: Framing::Reenactment,
            condition: if premise_id.is_some() { Condition::WithPremise } else { Condition::WithoutPremise },
            lines: vec![
                ScriptLine::SceneHeading { text: "INT. BANK".into() },
                ScriptLine::dialog("Ed Delaney", None, "Where is my card?"),
                ScriptLine::dialog("Credit Union", None, "Chips are short."),
            ],
            provenance: Provenance::Generated,
            starred: false,
            created_at: Timestamp(2_000),
        }
    }

    fn board(script_id: &str, generation: u32) -> CharacterBoard {
        let card = CharacterCard {
            character_name: "Ed Delaney".into(),
            aliases: vec![],
            description: "a man".into(),
            props: vec!["mug".into()],
            background_description: "kitchen".into(),
            background_image_prompt: "kitchen".into(),
            portrait_image: None,
            background_image: None,
        };
        CharacterBoard { generation, script_id: script_id.into(), visual_setting: "bank".into(), cards: vec![card] }
    }

    fn storyboard(script_id: &str, generation: u32) -> Storyboard {
        let panel = |i| StoryboardPanel {
            line_index: i,
            speaker: "x".into(),
            expression: "e".into(),
            gesture: "g".into(),
            action: "a".into(),
            image_prompt: "p".into(),
            image: None,
        };
        Storyboard { script_id: script_id.into(), board_generation: generation, panels: vec![panel(1), panel(2)] }
    }

    fn record(p: &mut Project, e: ProjectEvent) -> Result<()> {
        let actor = e.default_actor();
        p.record(e, actor, Timestamp(5_000)).map(|_| ())
    }

    #[test]
    fn storyboard_before_board_is_a_stage_violation() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        record(&mut p, ProjectEvent::FactsExtracted { facts: facts(), raw_replies: vec![], warnings: vec![] }).unwrap();
        record(&mut p, ProjectEvent::PremiseAdded { premise: premise("premise-001"), warnings: vec![] }).unwrap();
        record(
            &mut p,
            ProjectEvent::ScriptAdded {
                script: script("script-001", Some("premise-001")),
                raw: None,
                warnings: vec![],
            },
        )
        .unwrap();
        let err =
            record(&mut p, ProjectEvent::StoryboardBuilt { storyboard: storyboard("script-001", 1) }).unwrap_err();
        assert_eq!(err, Error::StageViolation { stage: Stage::ScriptActive, action: StageAction::BuildStoryboard });
        assert_eq!(p.event_log.len(), 4);
    }

    #[test]
    fn with_premise_script_needs_premise_stage() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        record(&mut p, ProjectEvent::FactsExtracted { facts: facts(), raw_replies: vec![], warnings: vec![] }).unwrap();
        let err = record(
            &mut p,
            ProjectEvent::ScriptAdded {
                script: script("script-001", Some("premise-001")),
                raw: None,
                warnings: vec![],
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::StageViolation { stage: Stage::Extracted, action: StageAction::GenerateScript }));
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-001", None), raw: None, warnings: vec![] })
            .unwrap();
        assert_eq!(p.stage, Stage::ScriptActive);
    }

    #[test]
    fn regenerating_script_marks_board_stale_and_keeps_it() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-001", None), raw: None, warnings: vec![] })
            .unwrap();
        record(&mut p, ProjectEvent::CharacterBoardBuilt { board: board("script-001", 1) }).unwrap();
        record(&mut p, ProjectEvent::StoryboardBuilt { storyboard: storyboard("script-001", 1) }).unwrap();
        assert_eq!(p.staleness(), Staleness::default());
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-002", None), raw: None, warnings: vec![] })
            .unwrap();
        assert!(p.character_board.is_some());
        assert_eq!(p.staleness(), Staleness { character_board: true, storyboard: true });
        let err =
            record(&mut p, ProjectEvent::StoryboardBuilt { storyboard: storyboard("script-002", 1) }).unwrap_err();
        assert!(matches!(err, Error::StageViolation { .. }));
    }

    #[test]
    fn back_jump_allowed_forward_jump_not() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-001", None), raw: None, warnings: vec![] })
            .unwrap();
        record(&mut p, ProjectEvent::CharacterBoardBuilt { board: board("script-001", 1) }).unwrap();
        record(&mut p, ProjectEvent::StoryboardBuilt { storyboard: storyboard("script-001", 1) }).unwrap();
        record(&mut p, ProjectEvent::StageReverted { stage: Stage::PremiseReady }).unwrap();
        assert_eq!(p.stage, Stage::PremiseReady);
        assert!(record(&mut p, ProjectEvent::StageReverted { stage: Stage::BoardReady }).is_err());
    }

    #[test]
    fn star_toggles() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-001", None), raw: None, warnings: vec![] })
            .unwrap();
        for expected in [true, false] {
            let e = p.toggle_star("script-001").unwrap();
            record(&mut p, e).unwrap();
            assert_eq!(p.script("script-001").unwrap().starred, expected);
        }
        assert_eq!(p.toggle_star("nope"), Err(Error::UnknownScript("nope".into())));
    }

    #[test]
    fn timestamps_are_clamped_monotonic_and_replay_matches() {
        let mut p = Project::create(article(), Timestamp(10)).unwrap();
        p.record(
            ProjectEvent::FactsExtracted { facts: facts(), raw_replies: vec![], warnings: vec![] },
            Actor::Machine,
            Timestamp(3),
        )
        .unwrap();
        assert_eq!(p.event_log[1].timestamp, Timestamp(10));
        assert_eq!(Project::replay(&p.event_log).unwrap(), p);
    }

    #[test]
    fn replay_rejects_tampering() {
        let mut p = Project::create(article(), Timestamp(10)).unwrap();
        record(&mut p, ProjectEvent::FactsExtracted { facts: facts(), raw_replies: vec![], warnings: vec![] }).unwrap();
        let mut log = p.event_log.clone();
        if let ProjectEvent::FactsExtracted { facts, .. } = &mut log[1].event {
            facts.setting = "elsewhere".into();
        }
        assert!(Project::replay(&log).is_err());
    }

    #[test]
    fn history_is_ordered_by_creation() {
        let mut p = Project::create(article(), Timestamp(1)).unwrap();
        let mut late = script("script-001", None);
        late.created_at = Timestamp(9_000);
        record(&mut p, ProjectEvent::ScriptAdded { script: late, raw: None, warnings: vec![] }).unwrap();
        record(&mut p, ProjectEvent::ScriptAdded { script: script("script-002", None), raw: None, warnings: vec![] })
            .unwrap();
        let ids: Vec<&str> = p.history().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["script-002", "script-001"]);
        assert!(Project::create(article(), Timestamp(1)).unwrap().history().is_empty());
    }
}
