use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};

/// Outcome of one attempt at a provider call.
#[derive(Debug)]
pub enum Attempt<T> {
    Done(T),
    /// Worth retrying: network trouble or a 5xx.
    Transient(String),
    /// Not worth retrying: the provider rejected the request (4xx).
    Rejected(String),
}

/// Bounded retries with exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_millis(250) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << retry.min(16))
    }

    pub fn run<T>(&self, mut attempt: impl FnMut() -> Attempt<T>) -> Result<T> {
        let mut retry = 0;
        loop {
            match attempt() {
                Attempt::Done(v) => return Ok(v),
                Attempt::Rejected(msg) => return Err(Error::ProviderUnavailable(msg)),
                Attempt::Transient(msg) if retry >= self.max_retries => {
                    return Err(Error::ProviderUnavailable(format!("{msg} (after {} retries)", self.max_retries)))
                }
                Attempt::Transient(_) => {
                    thread::sleep(self.delay(retry));
                    retry += 1;
                }
            }
        }
    }
}

/// Classifies an HTTP status: 4xx is a rejection, anything else non-2xx is
/// transient.
pub fn classify_status(status: u16) -> Option<bool> {
    match status {
        200..=299 => None,
        400..=499 => Some(false),
        _ => Some(true),
    }
}
