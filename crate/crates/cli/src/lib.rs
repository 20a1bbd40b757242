//! Configuration, orchestration and artifact output for the `spme` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with_defaults, parse_sample_times, RunConfig};
pub use run::{run_subcommand, write_outcome, Outcome, Status};
