//! Experiment runner behind the `ssd` binary.

mod config;
mod output;
mod runner;

pub use config::{parse_key_values, validate, Experiment, FieldError, RunConfig, ValidationReport};
pub use output::{emit_plotdata, write_history, HISTORY_COLUMNS, HISTORY_SCHEMA_VERSION};
pub use runner::{run, RunSummary};
