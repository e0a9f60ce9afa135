//! Provider-backed pipeline steps. Each step returns plain values; recording
//! them on a project is the session's job.

pub mod evalkit;
pub mod extraction;
pub mod highlights;
pub mod premise;
pub mod scriptgen;
pub mod visuals;

use newsreel_core::Error as CoreError;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::providers::{CompletionRequest, Providers};

/// Asks `prompt`, parses the reply, and on a parse failure asks `reask`
/// once before giving up. Returns the parsed value and the reply it came
/// from.
pub(crate) fn ask<T>(
    providers: &Providers,
    tag: &str,
    prompt: &str,
    reask: Option<&str>,
    parse: impl Fn(&str) -> newsreel_core::Result<T>,
) -> Result<(T, String)> {
    let raw = providers.complete(&CompletionRequest::for_step(tag, prompt))?;
    let first = match parse(&raw) {
        Ok(v) => return Ok((v, raw)),
        Err(e) => e,
    };
    let Some(reask) = reask else {
        return Err(parse_failure(tag, &first, &raw));
    };
    let raw = providers.complete(&CompletionRequest::for_step(tag, reask))?;
    match parse(&raw) {
        Ok(v) => Ok((v, raw)),
        Err(e) => Err(parse_failure(tag, &e, &raw)),
    }
}

fn parse_failure(tag: &str, cause: &CoreError, raw: &str) -> Error {
    let reason = match cause {
        CoreError::ParseFailure(r) => r.clone(),
        other => other.to_string(),
    };
    Error::Core(CoreError::ParseFailure(format!("{tag}: {reason}; last reply was:\n{raw}")))
}

/// The re-ask text that appends `clarifier` to `prompt`.
pub(crate) fn with_clarifier(prompt: &str, clarifier: &str) -> String {
    format!("{prompt}\n{clarifier}")
}

/// Runs `f` over `items` on at most `providers.parallelism()` threads,
/// keeping input order. The first error in input order wins.
pub(crate) fn fan_out<I, T, F>(providers: &Providers, items: &[I], f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T> + Sync + Send,
{
    if items.len() <= 1 || providers.parallelism() == 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(providers.parallelism().min(items.len()))
        .build()
        .map_err(|e| Error::ProviderUnavailable(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| items.par_iter().map(&f).collect());
    results.into_iter().collect()
}
