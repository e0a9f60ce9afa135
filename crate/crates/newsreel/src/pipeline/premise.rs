use newsreel_core::parse::{parse_analogies, parse_labeled_value, parse_premise_characters};
use newsreel_core::prompts::{
    analogy_plot_prompt, copied_info_points, fixed_premise_plot, premise_characters_prompt, premise_setting_prompt,
    NUMBERED_LIST_CLARIFIER,
};
use newsreel_core::{validate_premise, Article, Error as CoreError, Framing, NewsFacts, Premise, Provenance};

use super::{ask, with_clarifier};
use crate::error::Result;
use crate::providers::Providers;

#[derive(Debug, Clone, PartialEq)]
pub struct PremiseDraft {
    pub premise: Premise,
    pub raw_replies: Vec<String>,
    pub warnings: Vec<String>,
}

/// Generates a premise for `framing`. Comedic analogies keep all three
/// candidate plots with the first selected.
pub fn generate_premise(
    framing: Framing,
    article: &Article,
    facts: &NewsFacts,
    providers: &Providers,
    id: impl Into<String>,
) -> Result<PremiseDraft> {
    article.validate()?;
    facts.validate()?;
    let mut raw_replies = Vec::new();
    let mut warnings = Vec::new();

    let prompt = premise_characters_prompt(framing, facts, article);
    let reask = with_clarifier(&prompt.text, NUMBERED_LIST_CLARIFIER);
    let ((characters, w), raw) =
        ask(providers, &prompt.name, &prompt.text, Some(&reask), |r| parse_premise_characters(r, framing))?;
    raw_replies.push(raw);
    warnings.extend(w);

    let (plot, candidate_plots) = match fixed_premise_plot(framing, facts) {
        Some(plot) => (plot, Vec::new()),
        None => {
            let prompt = analogy_plot_prompt(facts, &characters, article);
            let reask = with_clarifier(&prompt.text, NUMBERED_LIST_CLARIFIER);
            let ((candidates, w), raw) = ask(providers, &prompt.name, &prompt.text, Some(&reask), parse_analogies)?;
            raw_replies.push(raw);
            warnings.extend(w);
            (candidates[0].clone(), candidates)
        }
    };

    let prompt = premise_setting_prompt(framing, &plot, article);
    let (setting, raw) = ask(providers, &prompt.name, &prompt.text, None, |r| parse_labeled_value(r, "Setting"))?;
    raw_replies.push(raw);

    let premise = Premise {
        id: id.into(),
        framing,
        characters,
        plot,
        setting,
        info_points: copied_info_points(framing, facts),
        provenance: Provenance::Generated,
        candidate_plots,
    };
    let violations = validate_premise(&premise);
    if !violations.is_empty() {
        return Err(CoreError::Validation(violations).into());
    }
    Ok(PremiseDraft { premise, raw_replies, warnings })
}
