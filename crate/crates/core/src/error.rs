use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the library.
///
/// Variants split into precondition failures (bad input, wrong type of
/// sequence) and numerical failures (an algorithm ran but could not certify
/// its output); [`Error::is_precondition`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular (condition estimate {0:e})")]
    Singular(f64),
    #[error("invalid quadratic form: {0}")]
    InvalidForm(String),
    #[error("vector is not isotropic: <v,v>/|v|^2 = {0:e}")]
    NotIsotropic(f64),
    #[error("matrix is not an isometry of the form (residual {0:e})")]
    NotIsometry(f64),
    #[error("form/basis mismatch: singular values {0:?} do not follow the (l, 1, ..., 1, 1/l) pattern")]
    FormBasisMismatch(Vec<f64>),
    #[error("equicontinuous: the sequence is not divergent")]
    Equicontinuous,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("sequence does not converge; {} subsequential clusters", .clusters.len())]
    NotConverged { clusters: Vec<Vec<f64>> },
    #[error("insufficient length: certificate not reached within the sequence")]
    InsufficientLength,
    #[error("group appears equicontinuous at this depth")]
    NoDivergentWords,
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("elliptic/parabolic: automorphism has no eigenvalue off the unit circle")]
    NotHyperbolic,
    #[error("cocycle undefined: {0}")]
    CocycleUndefined(String),
    #[error("lorentz check failed at clause `{clause}`: {detail}")]
    LorentzViolation { clause: String, detail: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the input rather than by the numerics.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::NotConverged { .. }
                | Error::InsufficientLength
                | Error::FormBasisMismatch(_)
                | Error::LorentzViolation { .. }
                | Error::Numerical(_)
                | Error::Budget(_)
        )
    }
}
