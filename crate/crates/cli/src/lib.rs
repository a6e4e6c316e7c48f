//! Scenario runner for the `supermode` simulator: resolves TOML scenario
//! files, runs their sweep points in parallel and writes CSV tables plus a
//! `run.json` manifest.

pub mod config;
pub mod expr;
pub mod run;

pub use config::{ConfigError, Overrides, ScenarioConfig, ScenarioKind};
pub use run::{run_scenario, RunReport, Verb};
