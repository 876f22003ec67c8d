//! Closed-form inverse of `R = I − Σ_{j=1}^L f_j ⊗ g_j`.
//!
//! With `{f_j}` linearly independent, `R` is invertible exactly when the
//! `L × L` matrix `I − M` is, where `M = (⟨f_k, g_j⟩)_{j,k}`, and then
//! `R⁻¹ = I + Σ_{j,k} c_{jk} f_j ⊗ g_k` with `C = (I − M)⁻¹`. Only `L × L`
//! systems are ever solved.

use crate::bridging::{partial_from_known, ReconstructionReport};
use crate::error::{Error, Result};
use crate::frames::{cross_gram, DualFramePair, ErasedCoefficients, IndexSet};
use crate::numerics::{
    invert_scaled, numeric_rank, op_norm, solve_least_squares, CMatrix, CVector, Tolerance,
};

const PIVOT_THRESHOLD: f64 = 0.5;

/// Rewrites `Σ f_j ⊗ g_j` so that the first components are linearly
/// independent, keeping the sum unchanged.
///
/// Pivoted Gram-Schmidt picks the kept `f_j`: at each step the earliest
/// remaining vector whose residual is at least half the largest residual.
/// Each dropped `f_d = Σ a_i f_i′` is folded into the kept terms as
/// `g_i′ += ā_i g_d`.
pub fn precondition_terms(
    fs: &CMatrix,
    gs: &CMatrix,
    tol: &Tolerance,
) -> Result<(CMatrix, CMatrix)> {
    if fs.shape() != gs.shape() {
        return Err(Error::DimensionMismatch {
            context: "tensor term lists",
            expected: fs.ncols(),
            found: gs.ncols(),
        });
    }
    let n = fs.nrows();
    let scale = fs.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((CMatrix::zeros(n, 0), CMatrix::zeros(n, 0)));
    }
    let cutoff = tol.rank_rel * scale;

    let mut residuals: Vec<CVector> = fs.column_iter().map(|c| c.into_owned()).collect();
    let mut remaining: Vec<usize> = (0..fs.ncols()).collect();
    let mut kept = Vec::new();
    while !remaining.is_empty() {
        let largest = remaining
            .iter()
            .map(|&j| residuals[j].norm())
            .fold(0.0, f64::max);
        if largest <= cutoff {
            break;
        }
        let pos = remaining
            .iter()
            .position(|&j| residuals[j].norm() >= PIVOT_THRESHOLD * largest)
            .expect("the largest residual qualifies");
        let pivot = remaining.remove(pos);
        let q = &residuals[pivot] / crate::numerics::re(residuals[pivot].norm());
        for &j in &remaining {
            // two Gram-Schmidt passes
            for _ in 0..2 {
                let proj = q.dotc(&residuals[j]);
                residuals[j] -= &q * proj;
            }
        }
        kept.push(pivot);
    }
    kept.sort_unstable();
    let dropped = remaining;

    let f_kept = fs.select_columns(kept.as_slice());
    let mut g_kept = gs.select_columns(kept.as_slice());
    if !dropped.is_empty() {
        let f_dropped = fs.select_columns(dropped.as_slice());
        let g_dropped = gs.select_columns(dropped.as_slice());
        let weights = solve_least_squares(&f_kept, &f_dropped, tol)?.solution;
        g_kept += g_dropped * weights.adjoint();
    }
    Ok((f_kept, g_kept))
}

/// `R⁻¹ = I + Σ_{j,k} c_{jk} f_j ⊗ g_k` in factored form.
#[derive(Clone, Debug)]
pub struct InverseForm {
    terms_f: CMatrix,
    terms_g: CMatrix,
    gram: CMatrix,
    coefficients: CMatrix,
}

impl InverseForm {
    /// Inverts `I − Σ f_j ⊗ g_j` for term lists given as matrix columns.
    pub fn from_terms(fs: &CMatrix, gs: &CMatrix, tol: &Tolerance) -> Result<Self> {
        let (terms_f, terms_g) = precondition_terms(fs, gs, tol)?;
        let gram = cross_gram(&terms_f, &terms_g)?;
        let l = gram.nrows();
        let i_minus_m = CMatrix::identity(l, l) - &gram;
        let scale = op_norm(&gram).max(1.0);
        let coefficients = invert_scaled(&i_minus_m, scale, tol).map_err(|e| match e {
            Error::Singular { rank, dim } => Error::NotInvertible { rank, size: dim },
            other => other,
        })?;
        Ok(Self {
            terms_f,
            terms_g,
            gram,
            coefficients,
        })
    }

    /// Independent first components `f_j′` (columns).
    pub fn terms_f(&self) -> &CMatrix {
        &self.terms_f
    }

    pub fn terms_g(&self) -> &CMatrix {
        &self.terms_g
    }

    /// `M = G({f′}, {g′})`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `C = (I − M)⁻¹`.
    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.terms_f.nrows()
    }

    /// Dense `n × n` matrix of the inverse.
    pub fn expand(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::identity(n, n) + &self.terms_f * &self.coefficients * self.terms_g.adjoint()
    }

    /// `x + Σ_{j,k} c_{jk} ⟨x, g_k⟩ f_j` without forming the dense inverse.
    pub fn apply(&self, x: &CVector) -> CVector {
        x + &self.terms_f * (&self.coefficients * (self.terms_g.adjoint() * x))
    }
}

/// Inverse of the partial reconstruction operator `R_Λ = I − Σ_{j∈Λ} f_j ⊗ g_j`.
pub fn invert_partial_reconstruction(
    pair: &DualFramePair,
    erased: &IndexSet,
    tol: &Tolerance,
) -> Result<InverseForm> {
    erased.check_universe(pair.len())?;
    InverseForm::from_terms(
        &pair.synthesis().select(erased),
        &pair.analysis().select(erased),
        tol,
    )
}

/// Recovers `f = R_Λ⁻¹ f_R` from the surviving coefficients.
pub fn reconstruct_via_inverse(
    pair: &DualFramePair,
    erased: &IndexSet,
    known: &ErasedCoefficients,
    tol: &Tolerance,
) -> Result<ReconstructionReport> {
    let form = invert_partial_reconstruction(pair, erased, tol)?;
    let (_, f_r) = partial_from_known(pair, erased, known)?;
    let f = form.apply(&f_r);
    Ok(ReconstructionReport {
        recovered_coefficients: pair.analysis().select(erased).adjoint() * &f,
        recovered_vector: Some(f),
        partial: f_r,
        supplement: None,
        bridged_estimate: None,
        reduced_error: None,
        max_abs_error: None,
    })
}

/// Rank of `I − M` after preconditioning; equals `L′` exactly when `R_Λ` is
/// invertible.
pub fn inverse_system_rank(
    pair: &DualFramePair,
    erased: &IndexSet,
    tol: &Tolerance,
) -> Result<(usize, usize)> {
    let (fs, gs) = precondition_terms(
        &pair.synthesis().select(erased),
        &pair.analysis().select(erased),
        tol,
    )?;
    let m = cross_gram(&fs, &gs)?;
    let l = m.nrows();
    Ok((numeric_rank(&(CMatrix::identity(l, l) - m), tol), l))
}
