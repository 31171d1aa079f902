//! Scenario files, the seeded experiment runner, report persistence and the
//! `cfmm-privacy` command line.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod format;
pub mod report;

use cfmm_privacy_core::Error as CoreError;

pub use config::{load_config, parse_config};
pub use experiment::{run_experiment, ExperimentReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    /// 2 for solver failures, 1 for everything the caller got wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(
                CoreError::Singular
                | CoreError::Convergence { .. }
                | CoreError::Bracket { .. }
                | CoreError::NoSolution(_)
                | CoreError::InfeasibleLp
                | CoreError::UnboundedLp
                | CoreError::DegenerateProbes { .. }
                | CoreError::QueryBudget(_),
            ) => 2,
            _ => 1,
        }
    }
}
