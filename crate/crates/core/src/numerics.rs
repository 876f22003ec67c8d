//! Dense complex linear algebra shared by every other module.
//!
//! All matrices are `DMatrix<Complex64>`; real data embeds with zero
//! imaginary parts. Storage and products use `nalgebra`; SVD and
//! eigenvalues go through `faer`, whose complex SVD stays backward stable on
//! inputs with clustered singular values. This module fixes the tolerance
//! conventions on top of both.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest square matrix accepted by [`eigenvalues`].
pub const EIGEN_SIZE_CAP: usize = 64;

/// Relative cutoffs used for rank decisions and consistency checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Singular values at or below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Relative residual below which a system or a duality identity holds.
    pub residual_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            residual_rel: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, residual_rel: f64) -> Result<Self> {
        for (name, v) in [("rank_rel", rank_rel), ("residual_rel", residual_rel)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            rank_rel,
            residual_rel,
        })
    }

    /// `residual <= residual_rel * (1 + scale)`.
    pub fn accepts_residual(&self, residual: f64, scale: f64) -> bool {
        residual <= self.residual_rel * (1.0 + scale)
    }
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Inner product, linear in the first slot and conjugate-linear in the second.
#[inline]
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    y.dotc(x)
}

/// The rank-one operator `x ⊗ y : z ↦ ⟨z, y⟩ x`, i.e. `x y*`.
pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

/// Matrix of pairwise inner products `(⟨x_j, y_k⟩)_{j,k}` between the
/// columns of `xs` and the columns of `ys`.
pub fn inner_products(xs: &CMatrix, ys: &CMatrix) -> CMatrix {
    xs.transpose() * ys.conjugate()
}

/// Builds a complex matrix from real rows.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
    CMatrix::from_fn(nrows, ncols, |i, j| re(rows[i][j]))
}

pub fn real_vector(xs: &[f64]) -> CVector {
    CVector::from_iterator(xs.len(), xs.iter().map(|&x| re(x)))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Spectral norm (largest singular value); zero for empty matrices.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    match to_faer(a).singular_values() {
        Ok(sv) => sv,
        Err(_) => a.singular_values().iter().copied().collect(),
    }
}

fn to_faer(a: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, Complex64>) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD `A = U diag(σ) V*`, singular values in nonincreasing order.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn thin_svd(a: &CMatrix) -> Result<ThinSvd> {
    if a.is_empty() {
        let k = a.nrows().min(a.ncols());
        return Ok(ThinSvd {
            u: CMatrix::zeros(a.nrows(), k),
            singular_values: Vec::new(),
            v: CMatrix::zeros(a.ncols(), k),
        });
    }
    let svd = to_faer(a).thin_svd().map_err(|_| Error::NoConvergence)?;
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        singular_values: svd.S().column_vector().iter().map(|z| z.re).collect(),
        v: from_faer(svd.V()),
    })
}

/// Number of singular values above `rank_rel * sigma_max`.
pub fn numeric_rank(a: &CMatrix, tol: &Tolerance) -> usize {
    numeric_rank_scaled(a, 0.0, tol)
}

/// Like [`numeric_rank`] but the cutoff is `rank_rel * max(sigma_max, scale)`.
///
/// Bridge matrices are built from inner products whose natural size is
/// `‖f‖‖g‖`; passing that as `scale` keeps roundoff-level matrices at rank 0.
pub fn numeric_rank_scaled(a: &CMatrix, scale: f64, tol: &Tolerance) -> usize {
    let sv = singular_values(a);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let reference = smax.max(scale);
    if reference == 0.0 {
        return 0;
    }
    let cutoff = tol.rank_rel * reference;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// `sigma_max / sigma_min`; infinite when the smallest singular value is zero.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    if sv.is_empty() {
        return 1.0;
    }
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

const REFINEMENT_STEPS: usize = 3;

/// Result of [`solve_least_squares`].
#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: CMatrix,
    pub consistent: bool,
    /// Frobenius norm of `A X - B`.
    pub residual: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `A X = B`.
///
/// The system is declared consistent when `‖AX − B‖_F ≤ residual_rel·(1 + ‖B‖_F)`.
pub fn solve_least_squares(a: &CMatrix, b: &CMatrix, tol: &Tolerance) -> Result<LeastSquares> {
    solve_least_squares_scaled(a, b, 0.0, tol)
}

/// [`solve_least_squares`] with the singular-value cutoff taken relative to
/// `max(sigma_max, scale)`.
pub fn solve_least_squares_scaled(
    a: &CMatrix,
    b: &CMatrix,
    scale: f64,
    tol: &Tolerance,
) -> Result<LeastSquares> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context: "least squares right-hand side rows",
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let bnorm = b.norm();
    let (solution, rank) = if a.is_empty() {
        (CMatrix::zeros(a.ncols(), b.ncols()), 0)
    } else {
        let svd = thin_svd(a)?;
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let reference = smax.max(scale);
        if reference == 0.0 {
            (CMatrix::zeros(a.ncols(), b.ncols()), 0)
        } else {
            let cutoff = tol.rank_rel * reference;
            let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
            let (u, v) = (&svd.u, &svd.v);
            // X = V Σ⁺ U* B restricted to the retained singular triplets.
            let pinv = |rhs: &CMatrix| {
                let mut utb = u.adjoint() * rhs;
                for (i, s) in svd.singular_values.iter().enumerate() {
                    let scale = if *s > cutoff { 1.0 / s } else { 0.0 };
                    utb.row_mut(i).scale_mut(scale);
                }
                v * utb
            };
            let mut x = pinv(b);
            let mut r = b - a * &x;
            let mut rnorm = r.norm();
            // refine against the true residual
            for _ in 0..REFINEMENT_STEPS {
                let candidate = &x + pinv(&r);
                let next = b - a * &candidate;
                let next_norm = next.norm();
                if next_norm.is_nan() || next_norm >= rnorm {
                    break;
                }
                x = candidate;
                r = next;
                rnorm = next_norm;
            }
            (x, rank)
        }
    };
    let residual = (a * &solution - b).norm();
    Ok(LeastSquares {
        consistent: tol.accepts_residual(residual, bnorm),
        solution,
        residual,
        rank,
    })
}

/// Inverse of a square matrix, refusing numerically singular input.
pub fn invert(a: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    invert_scaled(a, 0.0, tol)
}

/// Like [`invert`] with the rank cutoff floored at `rank_rel * scale`, for
/// matrices formed by cancellation such as `I − M`.
pub fn invert_scaled(a: &CMatrix, scale: f64, tol: &Tolerance) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "invert: matrix must be square",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let dim = a.nrows();
    if dim == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let rank = numeric_rank_scaled(a, scale, tol);
    if rank < dim {
        return Err(Error::Singular { rank, dim });
    }
    a.clone()
        .try_inverse()
        .ok_or(Error::Singular { rank: dim - 1, dim })
}

/// All eigenvalues (with algebraic multiplicity, unordered) of a small
/// square matrix.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigenvalues: matrix must be square",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    if n > EIGEN_SIZE_CAP {
        return Err(Error::UnsupportedSize {
            what: "eigenvalue problem",
            size: n,
            cap: EIGEN_SIZE_CAP,
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    to_faer(a).eigenvalues().map_err(|_| Error::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 1e-9).is_err());
        assert!(Tolerance::new(1e-10, 1.0).is_err());
        assert!(Tolerance::new(1e-10, 1e-9).is_ok());
    }

    #[test]
    fn least_squares_identity() {
        let i2 = CMatrix::identity(2, 2);
        let ls = solve_least_squares(&i2, &i2, &tol()).unwrap();
        assert!(ls.consistent);
        assert_eq!(ls.residual, 0.0);
        assert!((ls.solution - i2).norm() < 1e-15);
    }

    #[test]
    fn least_squares_rank_deficient_minimum_norm() {
        let a = real_matrix(&[&[-1.0, -1.0], &[1.0, 1.0]]);
        let b = real_matrix(&[&[0.0, -1.0], &[0.0, 1.0]]);
        let ls = solve_least_squares(&a, &b, &tol()).unwrap();
        assert!(ls.consistent);
        assert_eq!(ls.rank, 1);
        let expected = real_matrix(&[&[0.0, 0.5], &[0.0, 0.5]]);
        assert!((ls.solution - expected).norm() < 1e-14);
    }

    #[test]
    fn least_squares_inconsistent_scalar() {
        let ls =
            solve_least_squares(&real_matrix(&[&[0.0]]), &real_matrix(&[&[1.0]]), &tol()).unwrap();
        assert!(!ls.consistent);
        assert!((ls.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn least_squares_row_mismatch() {
        let err = solve_least_squares(&CMatrix::identity(2, 2), &CMatrix::identity(3, 3), &tol());
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&CMatrix::identity(3, 3), &tol()), 3);
        assert_eq!(
            numeric_rank(&real_matrix(&[&[1.0, 1.0], &[1.0, 1.0]]), &tol()),
            1
        );
        assert_eq!(
            numeric_rank(&real_matrix(&[&[-1.0, -1.0], &[1.0, 1.0]]), &tol()),
            1
        );
        assert_eq!(numeric_rank(&CMatrix::zeros(2, 2), &tol()), 0);
    }

    #[test]
    fn scaled_rank_ignores_roundoff() {
        let tiny = real_matrix(&[&[1e-17]]);
        assert_eq!(numeric_rank(&tiny, &tol()), 1);
        assert_eq!(numeric_rank_scaled(&tiny, 1.0, &tol()), 0);
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = sorted(eigenvalues(&CMatrix::identity(2, 2)).unwrap());
        assert!((ev[0] - re(1.0)).norm() < 1e-14 && (ev[1] - re(1.0)).norm() < 1e-14);

        let idem = real_matrix(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let ev = sorted(eigenvalues(&idem).unwrap());
        assert!(ev[0].norm() < 1e-14);
        assert!((ev[1] - re(1.0)).norm() < 1e-14);

        let nil = real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(eigenvalues(&nil).unwrap().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex() {
        let rot = real_matrix(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let ev = sorted(eigenvalues(&rot).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_reject_oversize() {
        let big = CMatrix::identity(EIGEN_SIZE_CAP + 1, EIGEN_SIZE_CAP + 1);
        assert!(matches!(
            eigenvalues(&big),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn invert_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert!((invert(&i2, &tol()).unwrap() - &i2).norm() < 1e-15);
        // 1 - <f2, g2> with the two-dimensional example pair.
        let one = real_matrix(&[&[1.0]]) - real_matrix(&[&[0.0]]);
        assert!((invert(&one, &tol()).unwrap()[(0, 0)] - re(1.0)).norm() < 1e-15);
        // 1 - <f1, g1> = 0.
        let zero = real_matrix(&[&[1.0]]) - real_matrix(&[&[1.0]]);
        assert_eq!(
            invert(&zero, &tol()),
            Err(Error::Singular { rank: 0, dim: 1 })
        );
    }
}
