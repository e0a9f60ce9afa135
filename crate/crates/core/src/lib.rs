//! Pure engine for turning a news article into a reel script and storyboard.
//!
//! This crate holds the domain model, prompt assembly, reply parsing,
//! screenplay formatting, linting, highlighting, statistics and the
//! event-sourced project. It performs no IO; providers and storage live in
//! the `newsreel` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod digest;
pub mod error;
pub mod highlight;
pub mod lint;
pub mod model;
pub mod names;
pub mod parse;
pub mod project;
pub mod prompts;
pub mod screenplay;
pub mod stats;

pub use error::{Error, Result};
pub use model::*;
pub use project::{Actor, EventRecord, HighlightRecord, Project, ProjectEvent, Stage, StageAction, Staleness};
