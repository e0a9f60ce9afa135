use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;
use crate::project::{Stage, StageAction};

/// Errors raised by the pure engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("could not parse reply: {0}")]
    ParseFailure(String),
    #[error("action {action:?} is not legal from stage {stage:?}")]
    StageViolation { stage: Stage, action: StageAction },
    #[error("unknown script `{0}`")]
    UnknownScript(String),
    #[error("unknown premise `{0}`")]
    UnknownPremise(String),
    #[error("speaker `{speaker}` on line {line_index} matches no character card")]
    UnknownSpeaker { line_index: usize, speaker: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, rule: &str) -> Self {
        Error::Validation(alloc::vec![Violation::new(field, rule)])
    }

    /// Stable machine-readable code for wire responses.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation_error",
            Error::ParseFailure(_) => "parse_failure",
            Error::StageViolation { .. } => "stage_violation",
            Error::UnknownScript(_) => "unknown_script",
            Error::UnknownPremise(_) => "unknown_premise",
            Error::UnknownSpeaker { .. } => "unknown_speaker",
            Error::Degenerate(_) => "degenerate",
        }
    }
}

fn join_violations(violations: &[Violation]) -> String {
    let mut out = String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&v.field);
        out.push_str(": ");
        out.push_str(&v.rule);
    }
    out
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
