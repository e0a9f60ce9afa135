//! Matching info points to the script lines that carry them.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HighlightEntry, HighlightSet, Script, ScriptLine, PALETTE_SIZE};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Words ignored by the lexical backend.
pub const STOPWORDS: [&str; 50] = [
    "a", "an", "the", "and", "or", "but", "is", "are", "was", "were", "be", "been", "being", "of", "in", "on", "at",
    "to", "for", "with", "by", "from", "as", "that", "this", "these", "those", "it", "its", "into", "than", "then",
    "so", "if", "about", "has", "have", "had", "do", "does", "did", "not", "no", "he", "she", "they", "we", "you", "i",
    "there",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityBackend {
    EmbeddingCosine,
    LexicalFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighlightConfig {
    pub threshold: f64,
    pub backend: SimilarityBackend,
}

impl Default for HighlightConfig {
    fn default() -> Self {
        HighlightConfig { threshold: DEFAULT_THRESHOLD, backend: SimilarityBackend::EmbeddingCosine }
    }
}

impl HighlightConfig {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.threshold) {
            Ok(())
        } else {
            Err(Error::invalid("threshold", "must lie in [0, 1]"))
        }
    }
}

/// A symmetric similarity score in `[0, 1]`.
pub trait Similarity {
    type Error: From<Error>;

    fn similarity(&mut self, a: &str, b: &str) -> core::result::Result<f64, Self::Error>;
}

/// Binary cosine over lowercased word sets with stopwords removed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lexical;

impl Similarity for Lexical {
    type Error = Error;

    fn similarity(&mut self, a: &str, b: &str) -> Result<f64> {
        lexical_similarity(a, b)
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(ToString::to_string)
        .collect()
}

fn content_words(text: &str) -> BTreeSet<String> {
    tokens(text).into_iter().filter(|t| !STOPWORDS.contains(&t.as_str())).collect()
}

pub fn lexical_similarity(a: &str, b: &str) -> Result<f64> {
    if a.trim().is_empty() || b.trim().is_empty() {
        return Err(Error::invalid("text", "similarity needs two non-empty texts"));
    }
    if tokens(a) == tokens(b) {
        return Ok(1.0);
    }
    let wa = content_words(a);
    let wb = content_words(b);
    if wa.is_empty() || wb.is_empty() {
        return Ok(0.0);
    }
    let overlap = wa.intersection(&wb).count() as f64;
    Ok(overlap / libm::sqrt(wa.len() as f64 * wb.len() as f64))
}

/// Cosine of two vectors, clamped into `[0, 1]`. Zero vectors score 0.
pub fn clamped_cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("embedding", "vectors differ in dimension"));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (libm::sqrt(na) * libm::sqrt(nb))).clamp(0.0, 1.0))
}

/// For each info point, the best-matching dialog line if it clears the
/// threshold. Ties go to the earliest line; one line may serve several
/// points.
pub fn assign_highlights<S: Similarity>(
    script: &Script,
    info_points: &[String],
    threshold: f64,
    backend: &mut S,
) -> core::result::Result<HighlightSet, S::Error> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid("threshold", "must lie in [0, 1]").into());
    }
    let candidates: Vec<(usize, &str)> = script
        .lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match l {
            ScriptLine::Dialog { text, .. } if !text.trim().is_empty() => Some((i, text.as_str())),
            _ => None,
        })
        .collect();
    if !script.lines.iter().any(ScriptLine::is_dialog) {
        return Err(Error::invalid("script", "needs at least one dialog line").into());
    }
    let mut entries = Vec::new();
    for (point_index, point) in info_points.iter().enumerate() {
        if point.trim().is_empty() {
            return Err(Error::invalid("info_points", "entries must not be empty").into());
        }
        let mut best: Option<(usize, f64)> = None;
        for &(line_index, text) in &candidates {
            let score = backend.similarity(point, text)?;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((line_index, score));
            }
        }
        if let Some((line_index, score)) = best {
            if score >= threshold {
                entries.push(HighlightEntry {
                    info_point_index: point_index,
                    line_index,
                    score,
                    color_index: point_index % PALETTE_SIZE,
                });
            }
        }
    }
    Ok(HighlightSet { entries })
}
