//! Configuration-driven experiment runner for `orbitflow`.
//!
//! A run reads one JSON [`ExperimentConfig`], executes one experiment kind and
//! writes `<out>/run-<hash12>/` holding the outputs and a `manifest.json`.
//! The hash is the sha256 of the canonical config and is repeated in every
//! output file.

pub mod compare;
pub mod config;
pub mod error;
pub mod manifest;
pub mod runner;

pub use compare::{compare, DiffReport};
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::CliError;
pub use manifest::Manifest;
pub use runner::{run, RunOutcome};
