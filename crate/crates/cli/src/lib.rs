//! Batch pipeline over k-hop ego subgraphs: extract, embed, reconstruct,
//! evaluate semantics, report. Every stage reads the previous stage's files
//! under the output directory and writes its own, so stages can be rerun
//! or resumed independently.

use std::path::{Path, PathBuf};

pub mod config;
pub mod dot;
pub mod embio;
pub mod pipeline;
pub mod report;

pub use config::{Overrides, PipelineConfig};
pub use pipeline::{run_all, StageOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] restore_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("malformed file: {0}")]
    Format(String),
    #[error("missing inputs from earlier stages: {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("no cell succeeded in stage {0}")]
    TotalFailure(String),
    #[error("report failed validation: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    /// Process exit status for an error that ends a command.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::USAGE,
            _ => exit::TOTAL_FAILURE,
        }
    }
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const TOTAL_FAILURE: i32 = 2;
    pub const PARTIAL_FAILURE: i32 = 3;
}
