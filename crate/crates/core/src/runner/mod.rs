//! Scenario orchestration: generate, evaluate, compare, report.

pub mod compare;
pub mod config;
pub mod divergence;
pub mod report;
pub mod run;
pub mod tables;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Archetype, ParamsError};
use crate::population::MixError;
use crate::stats::StatsError;

pub use compare::{compare_archetype_pairs, compare_categories, ComparisonRow, Measure};
pub use config::{Scenario, ScenarioConfig};
pub use report::{emit_reports, run_scenario, Manifest, ReportBundle};
pub use run::{ScenarioRun, UtilityRow};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    InvalidMix(#[from] MixError),
    #[error("invalid model parameters: {0}")]
    InvalidParams(#[from] ParamsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("not enough {archetype} followers for pairwise comparison: {count} (need 2)")]
    InsufficientSample { archetype: Archetype, count: usize },
    #[error("malformed run file {path}: {message}")]
    MalformedInput { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }
}
