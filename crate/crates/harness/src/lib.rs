//! Scenario runner for the openbath models: configs, data files, and the acceptance suite.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;
pub mod validation;

pub use config::Scenario;
pub use error::{HarnessError, HarnessResult};
pub use scenarios::{run_scenario, RunOptions, Summary};
