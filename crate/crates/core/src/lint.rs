//! Advisory checks of a script against reel style bounds.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{Script, ScriptLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintPolicy {
    pub min_dialog_lines: usize,
    pub max_dialog_lines: usize,
    /// A dialog line with this many words or more is too long.
    pub max_words_exclusive: usize,
    /// A final line ending in a period with more words than this reads as a
    /// bare statement rather than a punchline.
    pub punchline_max_words: usize,
}

impl Default for LintPolicy {
    fn default() -> Self {
        LintPolicy { min_dialog_lines: 10, max_dialog_lines: 12, max_words_exclusive: 20, punchline_max_words: 15 }
    }
}

impl LintPolicy {
    /// Bounds wide enough that every script passes.
    pub fn permissive() -> Self {
        LintPolicy {
            min_dialog_lines: 0,
            max_dialog_lines: usize::MAX,
            max_words_exclusive: usize::MAX,
            punchline_max_words: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintCode {
    LineCountLow,
    LineCountHigh,
    LineTooLong,
    MissingPunchline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: LintCode,
    #[serde(default)]
    pub line_index: Option<usize>,
    pub message: String,
}

/// Words actually spoken: whitespace tokens once any inline parentheticals
/// are removed.
pub fn spoken_word_count(text: &str) -> usize {
    let mut spoken = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                spoken.push(' ');
            }
            ')' if depth > 0 => {
                depth -= 1;
                spoken.push(' ');
            }
            _ if depth == 0 => spoken.push(c),
            _ => {}
        }
    }
    spoken.split_whitespace().count()
}

pub fn lint_script(script: &Script, policy: &LintPolicy) -> Vec<Finding> {
    let mut findings = Vec::new();
    let dialog: Vec<(usize, &str)> = script
        .lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            ScriptLine::Dialog { text, .. } => Some((i, text.as_str())),
            _ => None,
        })
        .collect();
    let count = dialog.len();
    if count < policy.min_dialog_lines {
        findings.push(Finding {
            code: LintCode::LineCountLow,
            line_index: None,
            message: format!("{count} dialog lines, fewer than {}", policy.min_dialog_lines),
        });
    }
    if count > policy.max_dialog_lines {
        findings.push(Finding {
            code: LintCode::LineCountHigh,
            line_index: None,
            message: format!("{count} dialog lines, more than {}", policy.max_dialog_lines),
        });
    }
    for &(index, text) in &dialog {
        let words = spoken_word_count(text);
        if words >= policy.max_words_exclusive {
            findings.push(Finding {
                code: LintCode::LineTooLong,
                line_index: Some(index),
                message: format!("{words} words; keep lines under {}", policy.max_words_exclusive),
            });
        }
    }
    if let Some(&(index, text)) = dialog.last() {
        let trimmed = text.trim_end();
        if trimmed.ends_with('.')
            && !trimmed.ends_with("...")
            && spoken_word_count(trimmed) > policy.punchline_max_words
        {
            findings.push(Finding {
                code: LintCode::MissingPunchline,
                line_index: Some(index),
                message: "final line reads as a plain statement; consider ending on a punchline".into(),
            });
        }
    }
    findings
}
