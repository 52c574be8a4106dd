use thiserror::Error;

use crate::config::ValidationReport;
use crate::cost::CostError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Invalid(#[from] ValidationReport),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(
        "search space of {candidates:.3e} candidates exceeds the ceiling of {ceiling}; use the greedy backend"
    )]
    SearchTooLarge { candidates: f64, ceiling: u64 },
    #[error("deployment space over {servers} servers is too large to enumerate")]
    ConfigSpaceTooLarge { servers: usize },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "invalid_scenario",
            Error::Parse { .. } => "parse",
            Error::Cost(_) => "cost",
            Error::SearchTooLarge { .. } => "search_too_large",
            Error::ConfigSpaceTooLarge { .. } => "config_space_too_large",
            Error::Input(_) => "input",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
