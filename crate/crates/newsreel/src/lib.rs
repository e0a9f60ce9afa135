//! Providers, orchestration, storage, export, HTTP API and CLI for the
//! news-to-reel engine. Pure logic lives in [`newsreel_core`].

pub use newsreel_core as core;

pub mod api;
pub mod blobs;
pub mod cli;
pub mod clock;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod providers;
pub mod ratings;
pub mod session;
pub mod workspace;

pub use error::{Error, Result};
