//! Batch runner for the checkers in `lab-core`: scenarios come from a TOML
//! file, results go out as one JSON-lines report per scenario plus a CSV
//! summary, and reports can be compared against goldens.

pub mod checkers;
pub mod config;
pub mod diff;
pub mod report;
pub mod runner;

pub use checkers::Checker;
pub use config::{load_config, parse_config, ConfigError, Expect, Scenario};
pub use diff::{diff_paths, diff_rows, read_rows, DiffError, Divergence};
pub use report::{Row, Status};
pub use runner::{run_scenarios, RunSummary};
