use thiserror::Error;

/// Errors produced by the walk library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("no connected sample after {attempts} attempts")]
    ConnectivityRetriesExhausted { attempts: u32 },

    #[error("permutation is not a bijection on 0..{0}")]
    NotBijection(usize),

    #[error("chiral symmetry violated (max |GHG + H| = {0:e})")]
    ChiralSymmetryBroken(f64),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged(_) | Error::ConnectivityRetriesExhausted { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
