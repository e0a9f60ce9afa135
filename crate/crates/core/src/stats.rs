//! Evaluation statistics: paired Wilcoxon signed-rank test, Cohen's kappa,
//! mean/SD summaries, and the rating records they run over.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of nonzero differences tested by exact enumeration.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub w_statistic: f64,
    pub p_two_sided: f64,
    pub method: WilcoxonMethod,
}

/// Ranks of `values` (ascending), doubled so tied averages stay integral.
pub fn doubled_average_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite values"));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end+1, doubled average = (start+1) + (end+1)
        let doubled = (start + end + 2) as u64;
        for &k in &order[start..=end] {
            ranks[k] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Paired-sample Wilcoxon signed-rank test on `a - b`.
///
/// Zero differences are dropped, tied magnitudes share their average rank,
/// and `W = min(W+, W-)`. Up to [`EXACT_MAX_N`] nonzero differences the
/// two-sided p is twice the exact lower tail of the null distribution
/// (capped at 1); above that a normal approximation with tie and continuity
/// corrections is used.
pub fn wilcoxon_signed_rank(pairs: &[Pair]) -> Result<WilcoxonResult> {
    if pairs.is_empty() {
        return Err(Error::invalid("pairs", "need at least one pair"));
    }
    if pairs.iter().any(|p| !p.a.is_finite() || !p.b.is_finite()) {
        return Err(Error::invalid("pairs", "values must be finite"));
    }
    let diffs: Vec<f64> = pairs.iter().map(|p| p.a - p.b).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::Degenerate("all paired differences are zero".into()));
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_average_ranks(&magnitudes);
    let plus: u64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| *r).sum();
    let total: u64 = ranks.iter().sum();
    let minus = total - plus;
    let w_doubled = plus.min(minus);
    let w_statistic = w_doubled as f64 / 2.0;

    if n <= EXACT_MAX_N {
        // counts[s] = number of sign assignments whose positive doubled-rank sum is s
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let tail: u64 = counts[..=w_doubled as usize].iter().sum();
        let p = (2.0 * tail as f64 / libm::pow(2.0, n as f64)).min(1.0);
        return Ok(WilcoxonResult { n_effective: n, w_statistic, p_two_sided: p, method: WilcoxonMethod::Exact });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let distance = (w_statistic - mean).abs() - 0.5;
    let p = if distance <= 0.0 {
        1.0
    } else {
        let z = distance / libm::sqrt(variance);
        libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
    };
    Ok(WilcoxonResult { n_effective: n, w_statistic, p_two_sided: p, method: WilcoxonMethod::NormalApprox })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
}

/// Unweighted Cohen's kappa between two raters over nominal categories.
pub fn cohens_kappa<T: Ord>(ratings_a: &[T], ratings_b: &[T]) -> Result<KappaResult> {
    if ratings_a.len() != ratings_b.len() {
        return Err(Error::invalid("ratings", "both raters need the same number of ratings"));
    }
    if ratings_a.is_empty() {
        return Err(Error::invalid("ratings", "need at least one rating"));
    }
    let n = ratings_a.len() as f64;
    let agree = ratings_a.iter().zip(ratings_b).filter(|(x, y)| x == y).count() as f64;
    let mut marginal_a: BTreeMap<&T, usize> = BTreeMap::new();
    let mut marginal_b: BTreeMap<&T, usize> = BTreeMap::new();
    for x in ratings_a {
        *marginal_a.entry(x).or_default() += 1;
    }
    for y in ratings_b {
        *marginal_b.entry(y).or_default() += 1;
    }
    let expected: f64 = marginal_a
        .iter()
        .map(|(cat, ca)| {
            let cb = marginal_b.get(cat).copied().unwrap_or(0);
            (*ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    let observed = agree / n;
    if (1.0 - expected).abs() < 1e-12 {
        return Err(Error::Degenerate("expected agreement is 1; kappa is undefined".into()));
    }
    Ok(KappaResult {
        kappa: (observed - expected) / (1.0 - expected),
        observed_agreement: observed,
        expected_agreement: expected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

/// Arithmetic mean and sample standard deviation (`n - 1` denominator,
/// 0 for a single score). Single pass, Welford's update.
pub fn summarize(scores: &[f64]) -> Result<Summary> {
    if scores.is_empty() {
        return Err(Error::invalid("scores", "need at least one score"));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in scores.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let sd = if scores.len() < 2 { 0.0 } else { libm::sqrt(m2 / (scores.len() - 1) as f64) };
    Ok(Summary { mean, sd })
}

/// The six rubric questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
}

impl Dimension {
    pub const ALL: [Dimension; 6] =
        [Dimension::Q1, Dimension::Q2, Dimension::Q3, Dimension::Q4, Dimension::Q5, Dimension::Q6];

    pub fn question(self) -> &'static str {
        match self {
            Dimension::Q1 => "How well does the script conform to the narrative framing?",
            Dimension::Q2 => "Is the information embedded in the script correct?",
            Dimension::Q3 => "Does the script cover the important information in the article?",
            Dimension::Q4 => "How coherent is the script? Can you understand what happens?",
            Dimension::Q5 => "Is the script fun/entertaining?",
            Dimension::Q6 => "Is the script in TikTok style?",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Q1 => "Q1",
            Dimension::Q2 => "Q2",
            Dimension::Q3 => "Q3",
            Dimension::Q4 => "Q4",
            Dimension::Q5 => "Q5",
            Dimension::Q6 => "Q6",
        }
    }
}

impl core::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid("dimension", "must be one of Q1..Q6"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub script_id: String,
    pub rater_id: String,
    pub dimension: Dimension,
    pub score: u8,
    #[serde(default)]
    pub justification: String,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        if !(1..=7).contains(&self.score) {
            return Err(Error::invalid("score", "must be an integer from 1 to 7"));
        }
        if self.script_id.trim().is_empty() || self.rater_id.trim().is_empty() {
            return Err(Error::invalid("rating", "script_id and rater_id must not be empty"));
        }
        Ok(())
    }
}

/// A without-premise script and its with-premise counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptPair {
    pub without_script_id: String,
    pub with_script_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: Dimension,
    pub pairs: usize,
    pub without_premise: Summary,
    pub with_premise: Summary,
    /// Absent when every pair ties.
    pub wilcoxon: Option<WilcoxonResult>,
}

fn mean_scores(ratings: &[RatingRecord], dimension: Dimension) -> BTreeMap<&str, f64> {
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in ratings.iter().filter(|r| r.dimension == dimension) {
        let e = sums.entry(r.script_id.as_str()).or_default();
        e.0 += r.score as f64;
        e.1 += 1;
    }
    sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
}

/// Per-dimension comparison of the two conditions: rater scores averaged
/// per script, then summarized and tested pair by pair (with minus without).
pub fn condition_report(ratings: &[RatingRecord], pairs: &[ScriptPair]) -> Result<Vec<DimensionReport>> {
    for r in ratings {
        r.validate()?;
    }
    let mut out = Vec::new();
    for dimension in Dimension::ALL {
        let scores = mean_scores(ratings, dimension);
        let matched: Vec<Pair> = pairs
            .iter()
            .filter_map(|p| {
                Some(Pair { a: *scores.get(p.with_script_id.as_str())?, b: *scores.get(p.without_script_id.as_str())? })
            })
            .collect();
        if matched.is_empty() {
            continue;
        }
        let with: Vec<f64> = matched.iter().map(|p| p.a).collect();
        let without: Vec<f64> = matched.iter().map(|p| p.b).collect();
        let wilcoxon = match wilcoxon_signed_rank(&matched) {
            Ok(w) => Some(w),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        out.push(DimensionReport {
            dimension,
            pairs: matched.len(),
            without_premise: summarize(&without)?,
            with_premise: summarize(&with)?,
            wilcoxon,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    /// `"pooled"` or a dimension name.
    pub grouping: String,
    pub items: usize,
    pub result: Option<KappaResult>,
}

/// Inter-rater agreement between exactly two raters, over all dimensions
/// pooled and per dimension. Items are matched on (script, dimension).
pub fn kappa_report(ratings: &[RatingRecord]) -> Result<Vec<KappaReport>> {
    for r in ratings {
        r.validate()?;
    }
    let raters: BTreeSet<&str> = ratings.iter().map(|r| r.rater_id.as_str()).collect();
    if raters.len() != 2 {
        return Err(Error::invalid("ratings", "kappa needs exactly two raters"));
    }
    let first = raters.first().copied().unwrap_or_default();
    type Scores = (Option<u8>, Option<u8>);
    let mut by_item: BTreeMap<(Dimension, &str), Scores> = BTreeMap::new();
    for r in ratings {
        let slot = by_item.entry((r.dimension, r.script_id.as_str())).or_default();
        if r.rater_id == first {
            slot.0 = Some(r.score);
        } else {
            slot.1 = Some(r.score);
        }
    }
    let complete: Vec<(Dimension, u8, u8)> =
        by_item.into_iter().filter_map(|((d, _), (a, b))| Some((d, a?, b?))).collect();
    let compute = |items: &[(Dimension, u8, u8)]| -> Result<Option<KappaResult>> {
        if items.is_empty() {
            return Ok(None);
        }
        let a: Vec<u8> = items.iter().map(|i| i.1).collect();
        let b: Vec<u8> = items.iter().map(|i| i.2).collect();
        match cohens_kappa(&a, &b) {
            Ok(k) => Ok(Some(k)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut out =
        vec![KappaReport { grouping: "pooled".to_string(), items: complete.len(), result: compute(&complete)? }];
    for dimension in Dimension::ALL {
        let items: Vec<(Dimension, u8, u8)> = complete.iter().copied().filter(|i| i.0 == dimension).collect();
        if !items.is_empty() {
            out.push(KappaReport {
                grouping: dimension.as_str().to_string(),
                items: items.len(),
                result: compute(&items)?,
            });
        }
    }
    Ok(out)
}
