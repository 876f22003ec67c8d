//! Frames, dual frame pairs and their structural predicates.

use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    inner_products, invert, is_finite, numeric_rank, op_norm, singular_values, solve_least_squares,
    CMatrix, CVector, Tolerance,
};

/// Largest frame accepted by the brute-force [`Frame::spark`] computation.
pub const SPARK_SIZE_CAP: usize = 20;

/// A finite frame for `C^n`, stored as an `n × N` table whose columns are the
/// frame vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    vectors: CMatrix,
}

/// Optimal lower and upper frame bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    is_frame: bool,
    is_parseval: bool,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        self.is_frame
    }

    pub fn is_parseval(&self) -> bool {
        self.is_parseval
    }
}

impl Frame {
    /// Wraps an `n × N` table of column vectors.
    pub fn from_columns(vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() == 0 || vectors.ncols() == 0 {
            return Err(Error::EmptyFrame);
        }
        if !is_finite(&vectors) {
            return Err(Error::NonFinite("frame vectors"));
        }
        Ok(Self { vectors })
    }

    pub fn from_vectors(vectors: &[CVector]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyFrame)?;
        let n = first.len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "frame vector length",
                expected: n,
                found: bad.len(),
            });
        }
        Self::from_columns(CMatrix::from_columns(vectors))
    }

    /// Frame from real vectors, one slice per vector.
    pub fn from_real(vectors: &[&[f64]]) -> Result<Self> {
        let vs: Vec<CVector> = vectors
            .iter()
            .map(|v| crate::numerics::real_vector(v))
            .collect();
        Self::from_vectors(&vs)
    }

    /// Dimension `n` of the underlying space.
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Number of frame vectors `N`.
    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, j: usize) -> CVector {
        self.vectors.column(j).into_owned()
    }

    pub fn vectors(&self) -> impl Iterator<Item = CVector> + '_ {
        self.vectors.column_iter().map(|c| c.into_owned())
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.vectors
    }

    /// Columns indexed by `set`, in ascending order.
    pub fn select(&self, set: &IndexSet) -> CMatrix {
        self.vectors.select_columns(set.as_slice())
    }

    pub fn map_vectors(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        Self::from_columns(f(&self.vectors))
    }

    /// Analysis coefficients `(⟨f, g_j⟩)_j` of `f` against this frame.
    pub fn analysis(&self, f: &CVector) -> Result<CVector> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "analysis input vector",
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(self.vectors.adjoint() * f)
    }

    /// Synthesis `Σ c_j f_j`.
    pub fn synthesis(&self, coeffs: &CVector) -> Result<CVector> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "synthesis coefficient count",
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        Ok(&self.vectors * coeffs)
    }

    /// Frame operator `S = Σ f_j ⊗ f_j`.
    pub fn frame_operator(&self) -> CMatrix {
        &self.vectors * self.vectors.adjoint()
    }

    /// Gramian `(⟨f_k, f_j⟩)_{j,k}`.
    pub fn gramian(&self) -> CMatrix {
        self.vectors.adjoint() * &self.vectors
    }

    pub fn frame_bounds(&self, tol: &Tolerance) -> FrameBounds {
        // The eigenvalues of S = FF* are the squared singular values of F.
        let sv = singular_values(&self.vectors);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let smin = if self.len() < self.dim() {
            0.0
        } else {
            sv.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let (lower, upper) = (smin * smin, smax * smax);
        let is_frame = smax > 0.0 && smin > tol.rank_rel * smax;
        let is_parseval =
            (lower - 1.0).abs() <= tol.residual_rel && (upper - 1.0).abs() <= tol.residual_rel;
        FrameBounds {
            lower,
            upper,
            is_frame,
            is_parseval,
        }
    }

    /// Canonical dual `{S⁻¹ f_j}` paired with this frame as synthesis frame.
    pub fn canonical_dual(&self, tol: &Tolerance) -> Result<DualFramePair> {
        let bounds = self.frame_bounds(tol);
        if !bounds.is_frame() {
            return Err(Error::NotAFrame {
                lower: bounds.lower,
                upper: bounds.upper,
            });
        }
        let n = self.dim();
        let mut g = match invert(&self.frame_operator(), tol) {
            Ok(s_inv) => s_inv * &self.vectors,
            // S squares the condition number of F; fall back to (F⁺)*.
            Err(Error::Singular { .. }) => {
                solve_least_squares(&self.vectors, &CMatrix::identity(n, n), tol)?
                    .solution
                    .adjoint()
            }
            Err(e) => return Err(e),
        };
        // one Newton step (I + D*) G with D = I − FG*; stays of the form TF
        let defect = CMatrix::identity(n, n) - &self.vectors * g.adjoint();
        if defect.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
            g += defect.adjoint() * &g;
        }
        let dual = Frame::from_columns(g)?;
        DualFramePair::new(self.clone(), dual, tol)
    }

    /// Whether the vectors outside `erased` still span the whole space.
    pub fn minimal_redundancy(&self, erased: &IndexSet, tol: &Tolerance) -> bool {
        let rest = erased.complement();
        if rest.is_empty() {
            return false;
        }
        numeric_rank(&self.select(&rest), tol) == self.dim()
    }

    /// Largest `k` such that every `k` frame vectors are linearly independent.
    pub fn spark(&self, tol: &Tolerance) -> Result<usize> {
        if self.len() > SPARK_SIZE_CAP {
            return Err(Error::UnsupportedSize {
                what: "spark enumeration",
                size: self.len(),
                cap: SPARK_SIZE_CAP,
            });
        }
        let scale = self.max_vector_norm();
        let mut spark = 0;
        for k in 1..=self.dim().min(self.len()) {
            let all_independent = (0..self.len()).combinations(k).all(|cols| {
                let sub = self.vectors.select_columns(cols.as_slice());
                crate::numerics::numeric_rank_scaled(&sub, scale, tol) == k
            });
            if !all_independent {
                break;
            }
            spark = k;
        }
        Ok(spark)
    }

    pub fn is_full_spark(&self, tol: &Tolerance) -> Result<bool> {
        Ok(self.spark(tol)? == self.dim())
    }

    pub(crate) fn max_vector_norm(&self) -> f64 {
        self.vectors
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Outcome of a duality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityCheck {
    pub is_dual: bool,
    /// Spectral norm of `Σ f_j ⊗ g_j − I`.
    pub residual: f64,
}

/// Checks whether `Σ f_j ⊗ g_j = I` within `residual_rel·√n`.
pub fn verify_dual_pair(f: &Frame, g: &Frame, tol: &Tolerance) -> Result<DualityCheck> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            context: "dual pair dimension",
            expected: f.dim(),
            found: g.dim(),
        });
    }
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            context: "dual pair frame size",
            expected: f.len(),
            found: g.len(),
        });
    }
    let n = f.dim();
    let defect = f.as_matrix() * g.as_matrix().adjoint() - CMatrix::identity(n, n);
    let residual = op_norm(&defect);
    Ok(DualityCheck {
        is_dual: residual <= tol.residual_rel * (n as f64).sqrt(),
        residual,
    })
}

/// A synthesis frame `F` and analysis frame `G` with `Σ f_j ⊗ g_j = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFramePair {
    synthesis: Frame,
    analysis: Frame,
    duality_residual: f64,
}

impl DualFramePair {
    pub fn new(synthesis: Frame, analysis: Frame, tol: &Tolerance) -> Result<Self> {
        let check = verify_dual_pair(&synthesis, &analysis, tol)?;
        if !check.is_dual {
            return Err(Error::NotDual {
                residual: check.residual,
            });
        }
        Ok(Self {
            synthesis,
            analysis,
            duality_residual: check.residual,
        })
    }

    /// The synthesis frame `F`.
    pub fn synthesis(&self) -> &Frame {
        &self.synthesis
    }

    /// The analysis frame `G`.
    pub fn analysis(&self) -> &Frame {
        &self.analysis
    }

    pub fn duality_residual(&self) -> f64 {
        self.duality_residual
    }

    pub fn dim(&self) -> usize {
        self.synthesis.dim()
    }

    pub fn len(&self) -> usize {
        self.synthesis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// An empty erasure set over this pair's index range.
    pub fn no_erasures(&self) -> IndexSet {
        IndexSet::empty(self.len())
    }
}

/// Cross Gram matrix `G({f}, {g})` with entry `(j, k) = ⟨f_k, g_j⟩`, for two
/// equally long lists given as matrix columns.
pub fn cross_gram(fs: &CMatrix, gs: &CMatrix) -> Result<CMatrix> {
    if fs.ncols() != gs.ncols() {
        return Err(Error::DimensionMismatch {
            context: "cross Gram list lengths",
            expected: fs.ncols(),
            found: gs.ncols(),
        });
    }
    if fs.nrows() != gs.nrows() {
        return Err(Error::DimensionMismatch {
            context: "cross Gram vector dimension",
            expected: fs.nrows(),
            found: gs.nrows(),
        });
    }
    Ok(inner_products(fs, gs).transpose())
}

/// Sorted set of distinct indices into a frame of `universe` vectors.
///
/// Stored zero-based; [`fmt::Display`] and [`IndexSet::one_based`] use the
/// one-based convention of the file formats.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    universe: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(universe: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::InvalidArgument("duplicate index".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= universe) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                universe,
            });
        }
        Ok(Self { universe, indices })
    }

    /// Builds a set from one-based indices.
    pub fn one_based(universe: usize, indices: &[usize]) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::IndexOutOfRange { index: 0, universe });
        }
        Self::new(universe, indices.iter().map(|i| i - 1))
    }

    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            indices: Vec::new(),
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            universe,
            indices: (0..universe).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + Clone + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            universe: self.universe,
            indices: (0..self.universe).filter(|i| !self.contains(*i)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.indices.iter().all(|i| !other.contains(*i))
    }

    /// The first `m` indices.
    pub fn truncated(&self, m: usize) -> Self {
        Self {
            universe: self.universe,
            indices: self.indices.iter().copied().take(m).collect(),
        }
    }

    pub(crate) fn check_universe(&self, universe: usize) -> Result<()> {
        if self.universe != universe {
            return Err(Error::DimensionMismatch {
                context: "index set universe",
                expected: universe,
                found: self.universe,
            });
        }
        Ok(())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_one_based().iter().join(","))
    }
}

/// Coefficients with erasures: `None` marks a lost value.
pub type ErasedCoefficients = [Option<Complex64>];

/// Drops the entries of `full` indexed by `erased`.
pub fn erase(full: &CVector, erased: &IndexSet) -> Vec<Option<Complex64>> {
    full.iter()
        .enumerate()
        .map(|(j, &z)| (!erased.contains(j)).then_some(z))
        .collect()
}
