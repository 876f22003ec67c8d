//! Brute-force oracles shared by the integration tests. None of these call
//! into the library's numerics.

#![allow(dead_code)]

use framebridge::{CMatrix, CVector, Complex64, DualFramePair, IndexSet};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gauss-Jordan elimination with partial pivoting; `None` if a pivot falls
/// below `1e-13` times the largest entry.
pub fn gauss_jordan_inverse(a: &CMatrix) -> Option<CMatrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut m = a.clone();
    let mut inv = CMatrix::identity(n, n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .unwrap();
        if m[(pivot, col)].norm() <= 1e-13 * scale {
            return None;
        }
        m.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = m[(col, col)];
        for k in 0..n {
            m[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[(row, col)];
            if factor == cz(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let mk = m[(col, k)];
                let ik = inv[(col, k)];
                m[(row, k)] -= factor * mk;
                inv[(row, k)] -= factor * ik;
            }
        }
    }
    Some(inv)
}

/// `Σ_{j∈S} f_j g_j*` by explicit outer products.
pub fn outer_sum(pair: &DualFramePair, indices: impl Iterator<Item = usize>) -> CMatrix {
    let f = pair.synthesis().as_matrix();
    let g = pair.analysis().as_matrix();
    let n = f.nrows();
    let mut out = CMatrix::zeros(n, n);
    for j in indices {
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += f[(r, j)] * g[(c, j)].conj();
            }
        }
    }
    out
}

/// `Σ_{j∉Λ} f_j ⊗ g_j`.
pub fn direct_partial(pair: &DualFramePair, erased: &IndexSet) -> CMatrix {
    outer_sum(pair, (0..pair.len()).filter(|j| !erased.contains(*j)))
}

/// Frobenius norm of `Σ f_j g_j* − I`.
pub fn duality_defect(f: &CMatrix, g: &CMatrix) -> f64 {
    let n = f.nrows();
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            let mut s = if r == c { cz(-1.0, 0.0) } else { cz(0.0, 0.0) };
            for j in 0..f.ncols() {
                s += f[(r, j)] * g[(c, j)].conj();
            }
            total += s.norm_sqr();
        }
    }
    total.sqrt()
}

/// `(⟨g_j, f⟩)_j`, i.e. the analysis coefficients `⟨f, g_j⟩` of `f`.
pub fn analysis_coefficients(g: &CMatrix, f: &CVector) -> CVector {
    CVector::from_fn(g.ncols(), |j, _| {
        (0..g.nrows()).map(|r| f[r] * g[(r, j)].conj()).sum()
    })
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Rank by singular values against `1e-10 · max(σ_max, scale)`.
pub fn svd_rank(a: &CMatrix, scale: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let reference = sv.iter().copied().fold(scale, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * reference).count()
}

/// Whether the analysis vectors outside `erased` span the space.
pub fn spans_without(pair: &DualFramePair, erased: &IndexSet) -> bool {
    let g = pair.analysis().as_matrix();
    let rest: Vec<usize> = (0..pair.len()).filter(|j| !erased.contains(*j)).collect();
    if rest.is_empty() {
        return false;
    }
    let scale = g.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    svd_rank(&g.select_columns(rest.iter()), scale) == pair.dim()
}

/// Eigenvalues from a complex Schur form.
pub fn dense_eigenvalues(a: &CMatrix) -> Vec<Complex64> {
    a.clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect()
}

pub fn gaussian_vector(n: usize, rng: &mut impl Rng) -> CVector {
    CVector::from_fn(n, |_, _| {
        cz(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// A uniformly random subset of `0..universe` with `size` elements.
pub fn random_subset(universe: usize, size: usize, rng: &mut impl Rng) -> IndexSet {
    let picked = rand::seq::index::sample(rng, universe, size).into_vec();
    IndexSet::new(universe, picked).unwrap()
}

pub fn max_abs(v: impl IntoIterator<Item = Complex64>) -> f64 {
    v.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
