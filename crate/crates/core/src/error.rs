use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("N must be odd")]
    EvenPointCount,
    #[error("N must be at least 3, got {0}")]
    TooFewPoints(usize),
    #[error("half-width L must be positive, got {0}")]
    NonPositiveHalfWidth(f64),
    #[error("unsupported dimension n = {0} (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("unknown profile {0:?}")]
    UnknownProfile(String),
    #[error("exponent q must be >= 1, got {0}")]
    ExponentBelowOne(f64),
    #[error("weight must be strictly positive")]
    NonPositiveWeight,
    #[error("field is identically zero")]
    ZeroField,
    #[error("grid mismatch between field and operator")]
    GridMismatch,
    #[error("order alpha must lie in (0,1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("nonlinear integral vanishes; Nehari projection undefined")]
    VanishingNonlinearity,
    #[error("not a field file")]
    BadMagic,
    #[error("unexpected end of field file")]
    TruncatedFile,
    #[error("field file dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("refinement ladder must be strictly increasing")]
    LadderNotIncreasing,
    #[error("refinement ladder rungs must share one half-width")]
    LadderHalfWidth,
    #[error("epsilon list must be descending")]
    EpsilonNotDescending,
    #[error("epsilon list must be nonempty and positive")]
    EpsilonInvalid,
    #[error("no strict concentration gap: condition (C) fails (margin {0:e})")]
    NoConcentrationGap(f64),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
