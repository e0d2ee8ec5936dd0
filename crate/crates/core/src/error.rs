use std::path::PathBuf;

use thiserror::Error;

/// Which of the three information matrices of the criterion failed a
/// positive-definiteness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoMatrix {
    /// `F'W0F`, the logistic (binary response) information.
    Binary,
    /// `F'W1F + rho R1^-1`, the continuous response given `Z = 1`.
    GivenOne,
    /// `F'W2F + rho R2^-1`, the continuous response given `Z = 0`.
    GivenZero,
    /// Single-matrix objectives used by the baseline generators.
    Baseline,
}

impl std::fmt::Display for InfoMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InfoMatrix::Binary => "F'W0F",
            InfoMatrix::GivenOne => "F'W1F + rho R1^-1",
            InfoMatrix::GivenZero => "F'W2F + rho R2^-1",
            InfoMatrix::Baseline => "baseline information",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular design: {0} is not positive definite")]
    SingularDesign(InfoMatrix),

    #[error("infeasible model: {0}")]
    InfeasibleModel(String),

    #[error("sampling failed: {0}")]
    SamplingFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by numerical infeasibility rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDesign(_) | Error::InfeasibleModel(_) | Error::SamplingFailed(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
