//! Rating CSV files and the condition and agreement reports built on them.

use std::fmt::Write as _;
use std::io::{Read, Write};

use newsreel_core::stats::{
    cohens_kappa, condition_report, kappa_report, wilcoxon_signed_rank, DimensionReport, KappaReport, KappaResult,
    Pair, RatingRecord, ScriptPair, WilcoxonMethod, WilcoxonResult,
};
use serde::Deserialize;

use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Reads ratings with columns script_id, rater_id, dimension, score,
/// justification. Every row is validated.
pub fn read_ratings(input: impl Read) -> Result<Vec<RatingRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RatingRecord>().enumerate() {
        let record = row.map_err(csv_error)?;
        record.validate().map_err(|e| Error::Format(format!("row {}: {e}", i + 2)))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_ratings(output: impl Write, ratings: &[RatingRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    for r in ratings {
        writer.serialize(r).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads script pairs with columns without_script_id, with_script_id.
pub fn read_pairs(input: impl Read) -> Result<Vec<ScriptPair>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    reader.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error)
}

#[derive(Debug, Deserialize)]
struct RawPair {
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
struct RawRatings {
    rater_a: String,
    rater_b: String,
}

/// Headers of a CSV text, trimmed.
fn headers(text: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    Ok(reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect())
}

fn has(headers: &[String], names: &[&str]) -> bool {
    names.iter().all(|n| headers.iter().any(|h| h == n))
}

/// Paired scores from a CSV with columns `a,b`.
pub fn read_raw_pairs(text: &str) -> Result<Vec<Pair>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader.deserialize::<RawPair>().map(|r| r.map(|p| Pair { a: p.a, b: p.b }).map_err(csv_error)).collect()
}

fn fmt_p(w: &Option<WilcoxonResult>) -> String {
    match w {
        None => "n/a (all pairs tie)".into(),
        Some(w) => {
            let method = match w.method {
                WilcoxonMethod::Exact => "exact",
                WilcoxonMethod::NormalApprox => "normal",
            };
            format!("W={} p={:.4} ({method}, n={})", w.w_statistic, w.p_two_sided, w.n_effective)
        }
    }
}

/// A table with one row per rubric dimension: mean (SD) per condition and
/// the paired test.
pub fn format_condition_report(rows: &[DimensionReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<4} {:>6} {:>16} {:>16}  test", "dim", "pairs", "without premise", "with premise");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<4} {:>6} {:>16} {:>16}  {}",
            r.dimension.as_str(),
            r.pairs,
            format!("{:.2} ({:.2})", r.without_premise.mean, r.without_premise.sd),
            format!("{:.2} ({:.2})", r.with_premise.mean, r.with_premise.sd),
            fmt_p(&r.wilcoxon)
        );
    }
    out
}

fn fmt_kappa(k: &Option<KappaResult>) -> String {
    match k {
        None => "n/a (chance agreement is total)".into(),
        Some(k) => format!("kappa={:.4} p_o={:.4} p_e={:.4}", k.kappa, k.observed_agreement, k.expected_agreement),
    }
}

pub fn format_kappa_report(rows: &[KappaReport]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "{:<7} items={:<4} {}", r.grouping, r.items, fmt_kappa(&r.result));
    }
    out
}

/// `eval wilcoxon`: either raw `a,b` pairs, or ratings plus a pairs file.
pub fn wilcoxon_command(input: &str, pairs: Option<&str>) -> Result<String> {
    let cols = headers(input)?;
    if has(&cols, &["a", "b"]) {
        let result = wilcoxon_signed_rank(&read_raw_pairs(input)?)?;
        return Ok(format!("{}\n", fmt_p(&Some(result))));
    }
    let pairs = pairs.ok_or_else(|| Error::invalid("pairs", "a pairs file is needed with rating input"))?;
    let report = condition_report(&read_ratings(input.as_bytes())?, &read_pairs(pairs.as_bytes())?)?;
    Ok(format_condition_report(&report))
}

/// `eval kappa`: either raw `rater_a,rater_b` columns, or ratings from
/// exactly two raters (reported pooled and per dimension).
pub fn kappa_command(input: &str) -> Result<String> {
    let cols = headers(input)?;
    if has(&cols, &["rater_a", "rater_b"]) {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input.as_bytes());
        let rows: Vec<RawRatings> = reader.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error)?;
        let a: Vec<&str> = rows.iter().map(|r| r.rater_a.as_str()).collect();
        let b: Vec<&str> = rows.iter().map(|r| r.rater_b.as_str()).collect();
        return Ok(format!("{}\n", fmt_kappa(&Some(cohens_kappa(&a, &b)?))));
    }
    Ok(format_kappa_report(&kappa_report(&read_ratings(input.as_bytes())?)?))
}
