use thiserror::Error;

/// Errors raised by the reconstruction toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("{what} of size {size} exceeds the supported cap of {cap}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("matrix is numerically singular (rank {rank} of {dim})")]
    Singular { rank: usize, dim: usize },

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty frame: at least one vector of positive dimension is required")]
    EmptyFrame,

    #[error("not a frame: lower frame bound {lower:e} is zero relative to upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("frames do not form a dual pair (duality residual {residual:e})")]
    NotDual { residual: f64 },

    #[error("index {index} out of range for {universe} elements")]
    IndexOutOfRange { index: usize, universe: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "no robust bridge set exists: minimal redundancy for the analysis frame {}",
        if *.minimal_redundancy { "holds, but no bridge was found within the size limit" } else { "fails" }
    )]
    NoRobustBridge { minimal_redundancy: bool },

    #[error("bridge plan is not robust (bridging residual {residual:e}); reconstruction refused")]
    NotRobust { residual: f64 },

    #[error(
        "partial reconstruction operator is not invertible (I - M has rank {rank} of {size}); \
         nilpotent bridging may still recover the erased coefficients"
    )]
    NotInvertible { rank: usize, size: usize },

    #[error("missing coefficient for non-erased index {0}")]
    MissingCoefficient(usize),

    #[error("minimal redundancy fails for the prescribed index set")]
    MinimalRedundancyFails,

    #[error("frame is not full spark (spark {spark}, dimension {dim})")]
    NotFullSpark { spark: usize, dim: usize },

    #[error("could not draw a full-spark frame after {0} attempts")]
    ResampleLimit(usize),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
