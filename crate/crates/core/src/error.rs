use thiserror::Error;

/// Errors produced by the transform, metric and codec routines.
#[derive(Debug, Error)]
pub enum RkltError {
    #[error("invalid Markov model: {0}")]
    InvalidModel(String),

    #[error("found {found} sign-change brackets for the eigenfrequency equation, expected {expected} (n={n}, rho={rho})")]
    RootBracketingFailure {
        n: usize,
        rho: f64,
        found: usize,
        expected: usize,
    },

    #[error("alpha={alpha} rounds entry ({row},{col}) to {value}, outside {{-1,0,1}}{}", rho.map(|r| format!(" at rho={r}")).unwrap_or_default())]
    AlphaOutOfRange {
        alpha: f64,
        rho: Option<f64>,
        row: usize,
        col: usize,
        value: i64,
    },

    #[error("integer transform has an all-zero row {row}")]
    ZeroRow { row: usize },

    #[error("integer transform entry ({row},{col}) = {value} is not in {{-1,0,1}}")]
    EntryOutOfAlphabet { row: usize, col: usize, value: i64 },

    #[error("T*T^T is not diagonal; the orthogonal scaling branch needs a general matrix square root")]
    NotDiagonalizableHere,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("transform is singular and cannot be inverted")]
    SingularTransform,

    #[error("retained coefficient count r={0} is outside [1,64]")]
    RetainOutOfRange(usize),

    #[error("unknown transform '{0}' (expected T1..T4, K, K<rho> or DCT)")]
    UnknownTransform(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("image error: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = RkltError> = std::result::Result<T, E>;
