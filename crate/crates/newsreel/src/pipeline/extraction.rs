use newsreel_core::parse::{parse_numbered_list, parse_stakeholders, parse_text};
use newsreel_core::prompts::{build_extraction_prompts, NUMBERED_LIST_CLARIFIER};
use newsreel_core::{Article, NewsFacts, Stakeholder};

use super::{ask, fan_out, with_clarifier};
use crate::error::Result;
use crate::providers::Providers;

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub facts: NewsFacts,
    /// Replies in prompt order: setting, stakeholders, plot summary, info
    /// points, plot elements.
    pub raw_replies: Vec<String>,
    pub warnings: Vec<String>,
}

enum Answer {
    Text(String),
    List(Vec<String>),
    Stakeholders(Vec<Stakeholder>, Vec<String>),
}

/// Runs the five extraction questions concurrently and assembles the facts.
pub fn extract_news_facts(article: &Article, providers: &Providers) -> Result<Extraction> {
    let bundle = build_extraction_prompts(article)?;
    let answers = fan_out(providers, &bundle.prompts, |p| {
        let reask = with_clarifier(&p.text, NUMBERED_LIST_CLARIFIER);
        match p.name.as_str() {
            "extract.stakeholders" => {
                let ((list, warnings), raw) = ask(providers, &p.name, &p.text, Some(&reask), parse_stakeholders)?;
                Ok((Answer::Stakeholders(list, warnings), raw))
            }
            "extract.info_points" | "extract.plot_elements" => {
                let (list, raw) = ask(providers, &p.name, &p.text, Some(&reask), parse_numbered_list)?;
                Ok((Answer::List(list), raw))
            }
            _ => {
                let (text, raw) = ask(providers, &p.name, &p.text, None, parse_text)?;
                Ok((Answer::Text(text), raw))
            }
        }
    })?;

    let mut raw_replies = Vec::new();
    let mut texts = Vec::new();
    let mut lists = Vec::new();
    let mut stakeholders = Vec::new();
    let mut warnings = Vec::new();
    for (answer, raw) in answers {
        raw_replies.push(raw);
        match answer {
            Answer::Text(t) => texts.push(t),
            Answer::List(l) => lists.push(l),
            Answer::Stakeholders(s, w) => {
                stakeholders = s;
                warnings.extend(w);
            }
        }
    }
    let mut lists = lists.into_iter();
    let mut texts = texts.into_iter();
    let facts = NewsFacts {
        setting: texts.next().unwrap_or_default(),
        stakeholders,
        plot_summary: texts.next().unwrap_or_default(),
        info_points: lists.next().unwrap_or_default(),
        plot_elements: lists.next().unwrap_or_default(),
    };
    facts.validate()?;
    let mut all_warnings = facts.count_warnings();
    all_warnings.extend(warnings);
    Ok(Extraction { facts, raw_replies, warnings: all_warnings })
}
