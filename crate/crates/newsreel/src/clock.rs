use std::sync::atomic::{AtomicI64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use newsreel_core::Timestamp;

/// Start of the logical clock used for replayed runs (2023-02-14T00:00:00Z).
pub const LOGICAL_EPOCH_MS: i64 = 1_676_332_800_000;

/// Source of timestamps. Replayed runs use a logical clock so that their
/// output is byte-for-byte repeatable.
#[derive(Debug)]
pub enum Clock {
    System,
    Logical { next: AtomicI64, step_ms: i64 },
}

impl Clock {
    pub fn logical() -> Self {
        Clock::Logical { next: AtomicI64::new(LOGICAL_EPOCH_MS), step_ms: 1_000 }
    }

    pub fn now(&self) -> Timestamp {
        match self {
            Clock::System => {
                let ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as i64).unwrap_or(0);
                Timestamp(ms)
            }
            Clock::Logical { next, step_ms } => Timestamp(next.fetch_add(*step_ms, Ordering::SeqCst)),
        }
    }
}
