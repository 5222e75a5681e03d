//! Config ingestion, check orchestration and JSON reports for `pelks`.

pub mod checks;
pub mod config;
pub mod fixtures;
pub mod report;

pub use config::{ConfigError, PelInstanceConfig};
pub use report::{run, Report, Status};
