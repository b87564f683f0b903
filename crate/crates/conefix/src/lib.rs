//! IO companion of `conefix-core`: CSV trace export, JSON scenario files and
//! the experiment commands behind the `conefix` binary.

pub mod commands;
pub mod scenario_file;
pub mod trace_csv;

pub use commands::{run, Cli, Command, Outcome};

use thiserror::Error;

/// Failures while reading or writing the file formats.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] conefix_core::Error),
}
