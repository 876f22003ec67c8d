//! Perfect reconstruction of vectors from frame coefficients with erasures.
//!
//! Two exact methods are provided: nilpotent bridging ([`bridging`]), which
//! replaces erased analysis vectors by combinations of surviving ones, and the
//! closed-form inverse of the partial reconstruction operator ([`inversion`]).
//! [`sampling`] applies bridging to sampling schemes, and [`spark_lab`]
//! builds designer duals and audits bridge-matrix invertibility.

pub mod bridging;
pub mod error;
pub mod fixtures;
pub mod frames;
pub mod inversion;
pub mod numerics;
pub mod sampling;
pub mod spark_lab;

pub use bridging::{
    bridge_matrix, error_operator, exhaustive_bridge_search, find_bridge_set,
    partial_reconstruction_operator, single_erasure_bridge, solve_bridge, BridgePlan,
    ReconstructionReport,
};
pub use error::{Error, Result};
pub use frames::{
    cross_gram, erase, verify_dual_pair, DualFramePair, DualityCheck, ErasedCoefficients, Frame,
    FrameBounds, IndexSet,
};
pub use inversion::{
    invert_partial_reconstruction, precondition_terms, reconstruct_via_inverse, InverseForm,
};
pub use numerics::{CMatrix, CVector, LeastSquares, Tolerance};
pub use sampling::{
    build_trig_scheme, build_truncated_shannon, recover_samples, SamplePoint, SampleRecovery,
    SamplingScheme, SchemeKind,
};
pub use spark_lab::{
    designer_dual, erasure_size_bound, extend_to_dual, genericity_trial, random_dual,
    skew_spark_audit, DualPerturbation, Field, GenericityStats, SkewSparkReport, TrialRecord,
};

pub use num_complex::Complex64;
