use newsreel_core::stats::ScriptPair;
use newsreel_core::{Article, Condition, Premise};

use super::scriptgen::{generate_script, GeneratedScript};
use crate::error::Result;
use crate::providers::Providers;

/// Scripts generated for the two prompt conditions from one premise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionRun {
    pub with_premise: Vec<GeneratedScript>,
    pub without_premise: Vec<GeneratedScript>,
}

impl ConditionRun {
    /// The i-th without-premise script paired with the i-th with-premise one.
    pub fn pairs(&self) -> Vec<ScriptPair> {
        self.without_premise
            .iter()
            .zip(&self.with_premise)
            .map(|(without, with)| ScriptPair {
                without_script_id: without.script.id.clone(),
                with_script_id: with.script.id.clone(),
            })
            .collect()
    }
}

/// Generates `k` scripts under each condition, alternating so that both
/// conditions see the same provider conditions. Ids come from `next_id`.
pub fn run_condition_pair(
    article: &Article,
    premise: &Premise,
    providers: &Providers,
    k: usize,
    mut next_id: impl FnMut() -> String,
) -> Result<ConditionRun> {
    let mut run = ConditionRun::default();
    for _ in 0..k {
        for condition in [Condition::WithPremise, Condition::WithoutPremise] {
            let now = providers.clock().now();
            let script =
                generate_script(article, Some(premise), premise.framing, condition, providers, next_id(), now)?;
            match condition {
                Condition::WithPremise => run.with_premise.push(script),
                Condition::WithoutPremise => run.without_premise.push(script),
            }
        }
    }
    Ok(run)
}
