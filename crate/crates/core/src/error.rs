use thiserror::Error;

use crate::network::Stage;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("moment constants are degenerate for d1={d1}, d2={d2}; use the pure-state second moment")]
    DegenerateMoment { d1: usize, d2: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("epsilon {epsilon} exceeds log of the leaf dimension {leaf}; no level exists")]
    NoLevels { epsilon: f64, leaf: u64 },

    #[error("schedule needs more than {max} levels (epsilon too small)")]
    TooManyLevels { max: usize },

    #[error("level {level} ({stage}) needs {amplitudes} amplitudes, above the cap of {cap}")]
    MemoryCap {
        level: usize,
        stage: Stage,
        amplitudes: String,
        cap: u64,
    },

    #[error("infeasible: {0}")]
    Feasibility(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid super-operator spec: {0}")]
    InvalidSpec(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    /// Feasibility failures are the ones the CLI reports with a dedicated exit code.
    pub fn is_feasibility(&self) -> bool {
        matches!(
            self,
            Error::MemoryCap { .. } | Error::Feasibility(_) | Error::TooManyLevels { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
