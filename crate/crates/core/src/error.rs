use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Variants split roughly into input validation (bad shapes, bad states,
/// bad generators) and semantic outcomes that the caller may want to treat
/// differently, such as a metric that does not exist at a rank change.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dagger| = {0:.3e}")]
    NonHermitianInput(f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("dimension {dim} exceeds the cap of 2^{cap_qubits}")]
    DimensionCap { dim: u128, cap_qubits: u32 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("generator is not normalised: f(1) = {0:.3e}")]
    GeneratorNotNormalised(f64),

    #[error("alpha = {alpha} outside the allowed range {range}")]
    AlphaOutOfRange { alpha: f64, range: &'static str },

    #[error("divergence is not smooth at coincidence (Richardson ratio {ratio:.3})")]
    NonSmoothDivergence { ratio: f64 },

    #[error("g function fails the monotone-metric checks: {0}")]
    NonMonotoneResult(String),

    #[error("epsilon regularisation did not converge: {0}")]
    RegularisationFailure(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
