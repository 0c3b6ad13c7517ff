use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants are grouped by how a caller should react: parameter and model
/// errors mean the inputs are inconsistent, the rest are numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("positivity error: smallest eigenvalue {0:.3e}")]
    Positivity(f64),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("degenerate clock: a single populated level has no time bound")]
    DegenerateClock,

    #[error("model error: {0}")]
    Model(String),

    #[error("cutoff error: {0}")]
    Cutoff(String),

    #[error("undefined clock: {0}")]
    UndefinedClock(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

impl Error {
    /// True for errors caused by inconsistent inputs rather than numerics.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Model(_) | Error::Dimension(_) | Error::DegenerateClock
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
