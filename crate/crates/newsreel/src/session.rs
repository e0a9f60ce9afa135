//! Workflow operations on one project: run a pipeline step, then record its
//! result as an event.

use newsreel_core::highlight::{HighlightConfig, SimilarityBackend, DEFAULT_THRESHOLD};
use newsreel_core::prompts::copied_info_points;
use newsreel_core::{
    Article, CharacterBoard, Condition, Error as CoreError, Framing, HighlightRecord, Premise, PremisePatch, Project,
    ProjectEvent, Script, ScriptLine, Stage, StageAction, Storyboard, Timestamp,
};

use crate::blobs::BlobStore;
use crate::error::{Error, Result};
use crate::pipeline::{extraction, highlights, premise, scriptgen, visuals};
use crate::providers::Providers;

/// Options for a highlight pass. Absent fields use the defaults: a 0.5
/// threshold and embeddings whenever they can be served.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct HighlightOptions {
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub backend: Option<SimilarityBackend>,
}

pub struct Session<'a> {
    providers: &'a Providers,
    blobs: &'a dyn BlobStore,
}

impl<'a> Session<'a> {
    pub fn new(providers: &'a Providers, blobs: &'a dyn BlobStore) -> Self {
        Session { providers, blobs }
    }

    pub fn providers(&self) -> &Providers {
        self.providers
    }

    fn now(&self) -> Timestamp {
        self.providers.clock().now()
    }

    fn record(&self, project: &mut Project, event: ProjectEvent) -> Result<()> {
        let actor = event.default_actor();
        project.record(event, actor, self.now())?;
        Ok(())
    }

    pub fn create_project(&self, article: Article) -> Result<Project> {
        Ok(Project::create(article, self.now())?)
    }

    pub fn extract(&self, project: &mut Project) -> Result<()> {
        project.check_stage(StageAction::Extract)?;
        let out = extraction::extract_news_facts(&project.article, self.providers)?;
        self.record(
            project,
            ProjectEvent::FactsExtracted { facts: out.facts, raw_replies: out.raw_replies, warnings: out.warnings },
        )
    }

    pub fn generate_premise(&self, project: &mut Project, framing: Framing) -> Result<Premise> {
        project.check_stage(StageAction::GeneratePremise)?;
        let facts = project
            .news_facts
            .as_ref()
            .ok_or(CoreError::StageViolation { stage: project.stage, action: StageAction::GeneratePremise })?;
        let draft =
            premise::generate_premise(framing, &project.article, facts, self.providers, project.next_premise_id())?;
        let premise = draft.premise.clone();
        self.record(project, ProjectEvent::PremiseAdded { premise: draft.premise, warnings: draft.warnings })?;
        Ok(premise)
    }

    /// Appends an edited copy of premise `premise_id`; the original stays.
    pub fn edit_premise(&self, project: &mut Project, premise_id: &str, patch: &PremisePatch) -> Result<Premise> {
        project.check_stage(StageAction::EditPremise)?;
        let original = project.premise(premise_id).ok_or_else(|| CoreError::UnknownPremise(premise_id.to_string()))?;
        let edited = original.patched(patch, project.next_premise_id())?;
        self.record(project, ProjectEvent::PremiseAdded { premise: edited.clone(), warnings: Vec::new() })?;
        Ok(edited)
    }

    fn chosen_premise<'p>(project: &'p Project, premise_id: Option<&str>) -> Result<&'p Premise> {
        match premise_id {
            Some(id) => project.premise(id).ok_or_else(|| CoreError::UnknownPremise(id.to_string()).into()),
            None => project.latest_premise().ok_or_else(|| Error::invalid("premise", "no premise to build on")),
        }
    }

    /// Generates a script. With a premise, `premise_id` defaults to the
    /// latest premise; without one, `framing` defaults to its framing.
    pub fn generate_script(
        &self,
        project: &mut Project,
        condition: Condition,
        premise_id: Option<&str>,
        framing: Option<Framing>,
    ) -> Result<Script> {
        let (premise, framing) = match condition {
            Condition::WithPremise => {
                if project.stage < Stage::PremiseReady {
                    return Err(CoreError::StageViolation {
                        stage: project.stage,
                        action: StageAction::GenerateScript,
                    }
                    .into());
                }
                let premise = Self::chosen_premise(project, premise_id)?;
                (Some(premise), premise.framing)
            }
            Condition::WithoutPremise => {
                let framing = framing
                    .or_else(|| project.latest_premise().map(|p| p.framing))
                    .ok_or_else(|| Error::invalid("framing", "required for the without-premise condition"))?;
                (None, framing)
            }
        };
        let out = scriptgen::generate_script(
            &project.article,
            premise,
            framing,
            condition,
            self.providers,
            project.next_script_id(),
            self.now(),
        )?;
        let script = out.script.clone();
        self.record(
            project,
            ProjectEvent::ScriptAdded { script: out.script, raw: Some(out.raw), warnings: out.warnings },
        )?;
        Ok(script)
    }

    /// Saves `lines` as a new edited version of `script_id`.
    pub fn edit_script(&self, project: &mut Project, script_id: &str, lines: Vec<ScriptLine>) -> Result<Script> {
        let original = project.script(script_id).ok_or_else(|| CoreError::UnknownScript(script_id.to_string()))?;
        let edited = original.edited(lines, project.next_script_id(), self.now())?;
        self.record(project, ProjectEvent::ScriptAdded { script: edited.clone(), raw: None, warnings: Vec::new() })?;
        Ok(edited)
    }

    /// Flips the star and returns the new value.
    pub fn star_script(&self, project: &mut Project, script_id: &str) -> Result<bool> {
        let event = project.toggle_star(script_id)?;
        let ProjectEvent::ScriptStarred { starred, .. } = event else {
            unreachable!("toggle_star yields a star event")
        };
        self.record(project, event)?;
        Ok(starred)
    }

    pub fn select_script(&self, project: &mut Project, script_id: &str) -> Result<()> {
        self.record(project, ProjectEvent::ActiveScriptSelected { script_id: script_id.to_string() })
    }

    pub fn revert(&self, project: &mut Project, stage: Stage) -> Result<()> {
        self.record(project, ProjectEvent::StageReverted { stage })
    }

    fn active_script(project: &Project, action: StageAction) -> Result<Script> {
        project
            .active_script()
            .cloned()
            .ok_or_else(|| CoreError::StageViolation { stage: project.stage, action }.into())
    }

    /// The points a script is checked against: its premise's, else those of
    /// the latest premise with its framing, else the extracted facts.
    pub fn info_points_for(project: &Project, script: &Script) -> Result<Vec<String>> {
        if let Some(p) = Self::premise_for(project, script) {
            return Ok(p.info_points.clone());
        }
        project
            .news_facts
            .as_ref()
            .map(|f| copied_info_points(script.framing, f))
            .ok_or_else(|| Error::invalid("info_points", "no premise or extracted facts to highlight"))
    }

    fn premise_for<'p>(project: &'p Project, script: &Script) -> Option<&'p Premise> {
        match &script.premise_id {
            Some(id) => project.premise(id),
            None => project.premises.iter().rev().find(|p| p.framing == script.framing),
        }
    }

    pub fn assign_highlights(&self, project: &mut Project, options: HighlightOptions) -> Result<HighlightRecord> {
        project.check_stage(StageAction::AssignHighlights)?;
        let script = Self::active_script(project, StageAction::AssignHighlights)?;
        let info_points = Self::info_points_for(project, &script)?;
        let config = HighlightConfig {
            threshold: options.threshold.unwrap_or(DEFAULT_THRESHOLD),
            backend: highlights::resolve_backend(options.backend, self.providers),
        };
        let set = highlights::highlight_script(&script, &info_points, &config, self.providers)?;
        let record = HighlightRecord { script_id: script.id.clone(), info_points, config, set };
        self.record(project, ProjectEvent::HighlightsAssigned { record: record.clone() })?;
        Ok(record)
    }

    pub fn build_character_board(&self, project: &mut Project) -> Result<CharacterBoard> {
        project.check_stage(StageAction::BuildCharacterBoard)?;
        let script = Self::active_script(project, StageAction::BuildCharacterBoard)?;
        let premise = Self::premise_for(project, &script)
            .or_else(|| project.latest_premise())
            .ok_or_else(|| Error::invalid("premise", "the character board needs a premise for its characters"))?
            .clone();
        let out = visuals::build_character_board(&script, &premise, self.providers, project.next_board_generation())?;
        for image in &out.images {
            self.blobs.put(image)?;
        }
        self.record(project, ProjectEvent::CharacterBoardBuilt { board: out.board.clone() })?;
        Ok(out.board)
    }

    pub fn build_storyboard(&self, project: &mut Project) -> Result<Storyboard> {
        project.check_stage(StageAction::BuildStoryboard)?;
        let board = project
            .character_board
            .clone()
            .ok_or(CoreError::StageViolation { stage: project.stage, action: StageAction::BuildStoryboard })?;
        let script = project
            .script(&board.script_id)
            .cloned()
            .ok_or_else(|| CoreError::UnknownScript(board.script_id.clone()))?;
        let out = visuals::build_storyboard(&script, &board, self.providers)?;
        for image in &out.images {
            self.blobs.put(image)?;
        }
        self.record(project, ProjectEvent::StoryboardBuilt { storyboard: out.storyboard.clone() })?;
        Ok(out.storyboard)
    }
}
