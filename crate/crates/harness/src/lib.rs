//! Experiment harness for the `ffpso` simulator: configuration files,
//! parallel parameter sweeps, summary statistics, CSV output and the
//! `ffpso` command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod stats;
pub mod sweep;

pub use cli::cli_main;
pub use error::HarnessError;
pub use stats::{read_stats_csv, write_stats_csv, CellStats, SweepStats};
pub use sweep::{run_seed, run_sweep, SweepSpec};
