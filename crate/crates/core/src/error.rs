use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("local Hilbert dimension must be at least 2, got {0}")]
    InvalidSiteDimension(usize),
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("support is not contained in the target volume")]
    SupportNotContained,
    #[error("operands live on different volumes")]
    VolumeMismatch,
    #[error("interactions have incompatible site spaces or lattice dimensions")]
    InteractionMismatch,
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("spectrum is not strictly positive (minimum eigenvalue {min:e})")]
    NonPositiveSpectrum { min: f64 },
    #[error("density matrix trace {trace} differs from 1")]
    NotNormalized { trace: f64 },
    #[error("Hilbert space dimension {dim} exceeds the cap {cap}")]
    VolumeTooLarge { dim: usize, cap: usize },
    #[error("ambient volume does not leave a margin of at least the interaction range")]
    MarginTooSmall,
    #[error("extrapolation needs at least 3 points, got {found}")]
    TooFewPoints { found: usize },
    #[error("state is not faithful (minimum eigenvalue {min:e})")]
    StateNotFaithful { min: f64 },
    #[error("complex-time evolution would overflow (exponent {exponent})")]
    OverflowRisk { exponent: f64 },
    #[error("expansional series needs order {needed}, above the limit {max_order}")]
    TruncationNotConverged { needed: usize, max_order: usize },
    #[error("lattice dimension {0} is not supported here")]
    DimensionNotSupported(usize),
}
