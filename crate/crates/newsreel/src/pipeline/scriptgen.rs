use newsreel_core::prompts::{build_script_prompt, script_reask};
use newsreel_core::screenplay::parse_script;
use newsreel_core::{Article, Condition, Framing, Premise, Provenance, Script, Timestamp};

use super::ask;
use crate::error::Result;
use crate::providers::Providers;

pub const SCRIPT_TAG: &str = "script.generate";

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScript {
    pub script: Script,
    pub raw: String,
    pub warnings: Vec<String>,
}

/// Generates and parses one script. With-premise scripts take their framing
/// from the premise.
pub fn generate_script(
    article: &Article,
    premise: Option<&Premise>,
    framing: Framing,
    condition: Condition,
    providers: &Providers,
    id: impl Into<String>,
    now: Timestamp,
) -> Result<GeneratedScript> {
    let prompt = build_script_prompt(premise, framing, article, condition)?;
    let reask = script_reask(&prompt);
    let (parsed, raw) = ask(providers, SCRIPT_TAG, &prompt, Some(&reask), parse_script)?;
    let (premise_id, framing) = match condition {
        Condition::WithPremise => (premise.map(|p| p.id.clone()), premise.map_or(framing, |p| p.framing)),
        Condition::WithoutPremise => (None, framing),
    };
    let script = Script {
        id: id.into(),
        premise_id,
        framing,
        condition,
        lines: parsed.lines,
        provenance: Provenance::Generated,
        starred: false,
        created_at: now,
    };
    script.validate()?;
    Ok(GeneratedScript { script, raw, warnings: parsed.warnings })
}
