use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible spectrum: weight {label} = {value:e} ({reason})")]
    InfeasibleSpectrum {
        label: String,
        value: f64,
        reason: String,
    },

    #[error("not correctable{}: {detail} (residual {residual:e})", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    NotCorrectable {
        location: Option<String>,
        residual: f64,
        detail: String,
    },

    #[error("validation failed for pair ({}, {}): {what}", pair.0, pair.1)]
    Validation { what: String, pair: (usize, usize) },

    #[error("resource cap exceeded: need {needed}, cap {cap} ({what})")]
    Resource {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InfeasibleSpectrum { .. } => 2,
            Error::NotCorrectable { .. } => 3,
            Error::Resource { .. } => 5,
            _ => 1,
        }
    }

    pub(crate) fn not_correctable(location: Option<String>, residual: f64, detail: impl Into<String>) -> Self {
        Error::NotCorrectable {
            location,
            residual,
            detail: detail.into(),
        }
    }
}
