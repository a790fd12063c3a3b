//! Scenario runner around the foliation laboratory: TOML-configured
//! models, a named check catalog, concurrent execution with
//! deterministic output, and a built-in gallery of reference scenarios.

pub mod catalog;
pub mod config;
pub mod gallery;
pub mod runner;

pub use catalog::{parse_check, run_check, CheckName, ALL_CHECKS};
pub use config::{Expect, RunnerModel, ScenarioConfig};
pub use runner::{run_scenario, RunSummary};
