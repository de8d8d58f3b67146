//! Config-driven sweeps over the anyon-Hubbard ladder: presets, caching and
//! deterministic CSV output on top of `anyladder-core`.

pub mod cache;
pub mod checks;
pub mod config;
pub mod error;
pub mod presets;
pub mod run;
pub mod table;

pub use crate::config::{ExperimentConfig, Kind};
pub use crate::error::CliError;
pub use crate::table::SweepTable;
