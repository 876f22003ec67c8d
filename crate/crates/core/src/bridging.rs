//! Nilpotent bridging of erased frame coefficients.
//!
//! Given a dual pair `(F, G)` and an erasure set `Λ`, each lost coefficient
//! `⟨f, g_k⟩` is replaced by `⟨f, g_k′⟩` with `g_k′ ∈ span{g_ω : ω ∈ Ω}`.
//! Choosing the weights so that `f_j ⊥ g_k − g_k′` for all `j, k ∈ Λ` makes
//! the reduced error operator square to zero, and the erased coefficients
//! (or the vector itself) are then recovered exactly in one matrix step.

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{DualFramePair, ErasedCoefficients, IndexSet};
use crate::numerics::{
    eigenvalues, inner, inner_products, numeric_rank, numeric_rank_scaled,
    solve_least_squares_scaled, CMatrix, CVector, Tolerance,
};

fn check_sets(pair: &DualFramePair, erased: &IndexSet, bridge: &IndexSet) -> Result<()> {
    erased.check_universe(pair.len())?;
    bridge.check_universe(pair.len())?;
    if !erased.is_disjoint(bridge) {
        return Err(Error::InvalidArgument(format!(
            "erasure set {erased} and bridge set {bridge} overlap"
        )));
    }
    Ok(())
}

fn max_column_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Natural magnitude of bridge-matrix entries, used to floor rank cutoffs.
fn entry_scale(pair: &DualFramePair, erased: &IndexSet) -> f64 {
    max_column_norm(&pair.synthesis().select(erased)) * max_column_norm(pair.analysis().as_matrix())
}

/// `(⟨f_λ, g_ω⟩)` without validation; either set may be empty.
fn bridge_block(pair: &DualFramePair, rows: &IndexSet, cols: &IndexSet) -> CMatrix {
    inner_products(
        &pair.synthesis().select(rows),
        &pair.analysis().select(cols),
    )
}

/// `R_Λ = Σ_{j∉Λ} f_j ⊗ g_j`.
pub fn partial_reconstruction_operator(pair: &DualFramePair, erased: &IndexSet) -> Result<CMatrix> {
    erased.check_universe(pair.len())?;
    let rest = erased.complement();
    Ok(pair.synthesis().select(&rest) * pair.analysis().select(&rest).adjoint())
}

/// `E_Λ = Σ_{j∈Λ} f_j ⊗ g_j = I − R_Λ`.
pub fn error_operator(pair: &DualFramePair, erased: &IndexSet) -> Result<CMatrix> {
    erased.check_universe(pair.len())?;
    Ok(pair.synthesis().select(erased) * pair.analysis().select(erased).adjoint())
}

/// Bridge matrix `B(F, G, Λ, Ω)` with entry `(j, k) = ⟨f_{λ_j}, g_{ω_k}⟩`.
pub fn bridge_matrix(
    pair: &DualFramePair,
    erased: &IndexSet,
    bridge: &IndexSet,
) -> Result<CMatrix> {
    check_sets(pair, erased, bridge)?;
    if erased.is_empty() || bridge.is_empty() {
        return Err(Error::InvalidArgument(
            "bridge matrix needs nonempty erasure and bridge sets".into(),
        ));
    }
    Ok(bridge_block(pair, erased, bridge))
}

/// `dim span{f_j : j ∈ Λ}`.
pub fn erased_span_dim(pair: &DualFramePair, erased: &IndexSet, tol: &Tolerance) -> usize {
    numeric_rank(&pair.synthesis().select(erased), tol)
}

/// A solved (or attempted) bridging of `Λ` from `Ω`.
#[derive(Clone, Debug)]
pub struct BridgePlan {
    pair: DualFramePair,
    erased: IndexSet,
    bridge: IndexSet,
    coefficients: CMatrix,
    bridged: CMatrix,
    robust: bool,
    residual: f64,
}

impl BridgePlan {
    /// Builds a plan from an explicit coefficient matrix `C` (`|Ω| × |Λ|`,
    /// entry `(ω, k)` the conjugate weight of `g_ω` in `g_k′`). Robustness is
    /// decided by how well `C` solves `B(Λ,Ω) C = B(Λ,Λ)`.
    pub fn from_coefficients(
        pair: &DualFramePair,
        erased: &IndexSet,
        bridge: &IndexSet,
        coefficients: CMatrix,
        tol: &Tolerance,
    ) -> Result<Self> {
        check_sets(pair, erased, bridge)?;
        if coefficients.shape() != (bridge.len(), erased.len()) {
            return Err(Error::DimensionMismatch {
                context: "bridge coefficient matrix shape (|Ω|·|Λ|)",
                expected: bridge.len() * erased.len(),
                found: coefficients.nrows() * coefficients.ncols(),
            });
        }
        let b = bridge_block(pair, erased, bridge);
        let target = bridge_block(pair, erased, erased);
        let residual = (&b * &coefficients - &target).norm();
        let robust = tol.accepts_residual(residual, target.norm());
        let bridged = pair.analysis().select(bridge) * coefficients.conjugate();
        Ok(Self {
            pair: pair.clone(),
            erased: erased.clone(),
            bridge: bridge.clone(),
            coefficients,
            bridged,
            robust,
            residual,
        })
    }

    pub fn pair(&self) -> &DualFramePair {
        &self.pair
    }

    pub fn erased(&self) -> &IndexSet {
        &self.erased
    }

    pub fn bridge(&self) -> &IndexSet {
        &self.bridge
    }

    /// `C`, of shape `|Ω| × |Λ|`.
    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }

    /// The vectors `g_k′`, one column per erased index.
    pub fn bridged_vectors(&self) -> &CMatrix {
        &self.bridged
    }

    pub fn is_robust(&self) -> bool {
        self.robust
    }

    /// Frobenius residual of the bridging equation.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest `|⟨f_j, g_k − g_k′⟩|` over `j, k ∈ Λ`.
    pub fn perpendicularity_defect(&self) -> f64 {
        let fs = self.pair.synthesis().select(&self.erased);
        let hs = self.pair.analysis().select(&self.erased) - &self.bridged;
        inner_products(&fs, &hs)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Bridging supplement operator `B_Λ = Σ_{j∈Λ} f_j ⊗ g_j′`.
    pub fn supplement_operator(&self) -> CMatrix {
        self.pair.synthesis().select(&self.erased) * self.bridged.adjoint()
    }

    /// Reduced error operator `Ẽ_Λ = Σ_{j∈Λ} f_j ⊗ (g_j − g_j′)`.
    pub fn reduced_error_operator(&self) -> CMatrix {
        let fs = self.pair.synthesis().select(&self.erased);
        let hs = self.pair.analysis().select(&self.erased) - &self.bridged;
        fs * hs.adjoint()
    }

    /// Keeps only the first `m` bridge indices and the matching rows of `C`.
    pub fn truncated(&self, m: usize, tol: &Tolerance) -> Result<Self> {
        let m = m.min(self.bridge.len());
        Self::from_coefficients(
            &self.pair,
            &self.erased,
            &self.bridge.truncated(m),
            self.coefficients.rows(0, m).into_owned(),
            tol,
        )
    }

    fn require_robust(&self) -> Result<()> {
        if self.robust {
            Ok(())
        } else {
            Err(Error::NotRobust {
                residual: self.residual,
            })
        }
    }

    /// Erased coefficients `(⟨f, g_j⟩)_{j∈Λ}` from the surviving ones:
    /// `C^T (α_Ω − β_Ω) + β_Λ` with `β_j = ⟨f_R, g_j⟩`.
    pub fn recover_coefficients(&self, known: &ErasedCoefficients) -> Result<CVector> {
        self.require_robust()?;
        let alpha = known_coefficients(&self.pair, &self.erased, known)?;
        let f_r = partial_reconstruction(&self.pair, &self.erased, &alpha);
        Ok(self.recover_from_partial(&alpha, &f_r))
    }

    fn recover_from_partial(&self, alpha: &CVector, f_r: &CVector) -> CVector {
        let beta_bridge = self.pair.analysis().select(&self.bridge).adjoint() * f_r;
        let beta_erased = self.pair.analysis().select(&self.erased).adjoint() * f_r;
        let alpha_bridge = alpha.select_rows(self.bridge.as_slice());
        self.coefficients.transpose() * (alpha_bridge - beta_bridge) + beta_erased
    }

    /// Full vector reconstruction `f = f̃ + Ẽ_Λ f_R` with every intermediate.
    pub fn reconstruct_vector(&self, known: &ErasedCoefficients) -> Result<ReconstructionReport> {
        self.require_robust()?;
        let alpha = known_coefficients(&self.pair, &self.erased, known)?;
        let f_r = partial_reconstruction(&self.pair, &self.erased, &alpha);
        // ⟨f, g_k′⟩ = Σ_ω C_{ωk} α_ω, known from the bridge coefficients alone.
        let bridged_coeffs =
            self.coefficients.transpose() * alpha.select_rows(self.bridge.as_slice());
        let f_b = self.pair.synthesis().select(&self.erased) * bridged_coeffs;
        let f_tilde = &f_r + &f_b;
        let f_e = self.reduced_error_operator() * &f_r;
        let recovered = &f_tilde + &f_e;
        Ok(ReconstructionReport {
            recovered_coefficients: self.recover_from_partial(&alpha, &f_r),
            recovered_vector: Some(recovered),
            partial: f_r,
            supplement: Some(f_b),
            bridged_estimate: Some(f_tilde),
            reduced_error: Some(f_e),
            max_abs_error: None,
        })
    }

    /// Eigenvalues of the `|Λ| × |Λ|` compression `(⟨f_k, g_j − g_j′⟩)_{j,k}`;
    /// its nonzero spectrum coincides with that of `Ẽ_Λ`.
    pub fn compressed_error_spectrum(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.compressed_error())
    }

    fn compressed_error(&self) -> CMatrix {
        let fs = self.pair.synthesis().select(&self.erased);
        let hs = self.pair.analysis().select(&self.erased) - &self.bridged;
        hs.adjoint() * fs
    }

    /// Frobenius norm of `Ẽ_Λ`, computed on `|Λ| × |Λ|` factors.
    pub fn reduced_error_norm(&self) -> f64 {
        let fs = self.pair.synthesis().select(&self.erased);
        let hs = self.pair.analysis().select(&self.erased) - &self.bridged;
        let trace = ((fs.adjoint() * fs) * (hs.adjoint() * hs)).trace();
        trace.re.max(0.0).sqrt()
    }

    /// Magnitude below which an eigenvalue of `Ẽ_Λ` counts as zero.
    pub fn zero_eigenvalue_threshold(&self, tol: &Tolerance) -> f64 {
        tol.rank_rel * self.reduced_error_norm().max(1.0)
    }

    /// Number of nonzero eigenvalues of `Ẽ_Λ`.
    pub fn nonzero_eigenvalue_count(&self, tol: &Tolerance) -> Result<usize> {
        let threshold = self.zero_eigenvalue_threshold(tol);
        Ok(self
            .compressed_error_spectrum()?
            .iter()
            .filter(|z| z.norm() > threshold)
            .count())
    }
}

fn known_coefficients(
    pair: &DualFramePair,
    erased: &IndexSet,
    known: &ErasedCoefficients,
) -> Result<CVector> {
    erased.check_universe(pair.len())?;
    if known.len() != pair.len() {
        return Err(Error::DimensionMismatch {
            context: "coefficient list length",
            expected: pair.len(),
            found: known.len(),
        });
    }
    let mut alpha = CVector::zeros(pair.len());
    for (j, value) in known.iter().enumerate() {
        if erased.contains(j) {
            continue;
        }
        alpha[j] = value.ok_or(Error::MissingCoefficient(j + 1))?;
    }
    Ok(alpha)
}

/// `f_R = Σ_{j∉Λ} α_j f_j`; `alpha` must already be zero on `Λ`.
fn partial_reconstruction(pair: &DualFramePair, erased: &IndexSet, alpha: &CVector) -> CVector {
    debug_assert!(erased.iter().all(|j| alpha[j] == Complex64::new(0.0, 0.0)));
    pair.synthesis().as_matrix() * alpha
}

/// Surviving coefficients as a vector with zeros on `Λ`, plus `f_R`.
pub(crate) fn partial_from_known(
    pair: &DualFramePair,
    erased: &IndexSet,
    known: &ErasedCoefficients,
) -> Result<(CVector, CVector)> {
    let alpha = known_coefficients(pair, erased, known)?;
    let f_r = partial_reconstruction(pair, erased, &alpha);
    Ok((alpha, f_r))
}

/// Reconstruction output shared by bridging and inverse-based recovery.
#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    /// Recovered `⟨f, g_j⟩` for `j ∈ Λ`, ascending.
    pub recovered_coefficients: CVector,
    pub recovered_vector: Option<CVector>,
    /// Partial reconstruction `f_R`.
    pub partial: CVector,
    /// Bridging supplement `f_B`.
    pub supplement: Option<CVector>,
    /// `f̃ = f_R + f_B`.
    pub bridged_estimate: Option<CVector>,
    /// `f_Ẽ = Ẽ_Λ f_R`.
    pub reduced_error: Option<CVector>,
    pub max_abs_error: Option<f64>,
}

impl ReconstructionReport {
    /// Records the largest entrywise deviation from a known reference vector.
    pub fn with_reference(mut self, reference: &CVector) -> Self {
        self.max_abs_error = self
            .recovered_vector
            .as_ref()
            .map(|v| (v - reference).iter().map(|z| z.norm()).fold(0.0, f64::max));
        self
    }
}

/// Solves `B(Λ,Ω) C = B(Λ,Λ)` in the least-squares sense (minimum-norm `C`)
/// and records whether the system is consistent, i.e. whether `Ω` is robust.
pub fn solve_bridge(
    pair: &DualFramePair,
    erased: &IndexSet,
    bridge: &IndexSet,
    tol: &Tolerance,
) -> Result<BridgePlan> {
    check_sets(pair, erased, bridge)?;
    let b = bridge_block(pair, erased, bridge);
    let target = bridge_block(pair, erased, erased);
    let ls = solve_least_squares_scaled(&b, &target, entry_scale(pair, erased), tol)?;
    BridgePlan::from_coefficients(pair, erased, bridge, ls.solution, tol)
}

/// Closed-form bridge for a single erasure `k` from a single index `ℓ`
/// (both zero-based): `g_k′ = (⟨g_k, f_k⟩ / ⟨g_ℓ, f_k⟩) g_ℓ`.
pub fn single_erasure_bridge(
    pair: &DualFramePair,
    k: usize,
    l: usize,
    tol: &Tolerance,
) -> Result<BridgePlan> {
    if k == l {
        return Err(Error::InvalidArgument(
            "erased and bridge index coincide".into(),
        ));
    }
    let erased = IndexSet::new(pair.len(), [k])?;
    let bridge = IndexSet::new(pair.len(), [l])?;
    let f_k = pair.synthesis().vector(k);
    let g_k = pair.analysis().vector(k);
    let g_l = pair.analysis().vector(l);
    let denom = inner(&f_k, &g_l);
    let cbar = if denom.norm() > tol.rank_rel * f_k.norm() * g_l.norm() {
        inner(&f_k, &g_k) / denom
    } else {
        // ⟨f_k, g_ℓ⟩ = 0: only C = 0 can work, and only if ⟨f_k, g_k⟩ = 0 too.
        Complex64::new(0.0, 0.0)
    };
    BridgePlan::from_coefficients(
        pair,
        &erased,
        &bridge,
        CMatrix::from_element(1, 1, cbar),
        tol,
    )
}

/// Rank criterion: `rank B(Λ,Ω) = dim span{f_j : j ∈ Λ}`. Sufficient for
/// robustness; also necessary when the pair is a Parseval frame with itself.
pub fn is_robust_by_rank(
    pair: &DualFramePair,
    erased: &IndexSet,
    bridge: &IndexSet,
    tol: &Tolerance,
) -> Result<bool> {
    check_sets(pair, erased, bridge)?;
    let b = bridge_block(pair, erased, bridge);
    let rank = numeric_rank_scaled(&b, entry_scale(pair, erased), tol);
    Ok(rank == erased_span_dim(pair, erased, tol))
}

/// Finds a robust bridge set for `Λ`.
///
/// Greedy over `Λᶜ` in ascending order, keeping an index only if it raises the
/// rank of the bridge matrix, until the rank reaches `dim span{f_j : j ∈ Λ}`.
/// Falls back to an exhaustive search when the greedy set is not robust.
pub fn find_bridge_set(
    pair: &DualFramePair,
    erased: &IndexSet,
    tol: &Tolerance,
    max_size: usize,
) -> Result<BridgePlan> {
    erased.check_universe(pair.len())?;
    if !pair.analysis().minimal_redundancy(erased, tol) {
        return Err(Error::NoRobustBridge {
            minimal_redundancy: false,
        });
    }
    let target = erased_span_dim(pair, erased, tol);
    let scale = entry_scale(pair, erased);
    let mut chosen: Vec<usize> = Vec::new();
    let mut rank = 0;
    for j in erased.complement().iter() {
        if rank >= target || chosen.len() >= max_size {
            break;
        }
        chosen.push(j);
        let candidate = IndexSet::new(pair.len(), chosen.iter().copied())?;
        let r = numeric_rank_scaled(&bridge_block(pair, erased, &candidate), scale, tol);
        if r > rank {
            rank = r;
        } else {
            chosen.pop();
        }
    }
    let greedy = IndexSet::new(pair.len(), chosen)?;
    let plan = solve_bridge(pair, erased, &greedy, tol)?;
    if plan.is_robust() {
        return Ok(plan);
    }
    exhaustive_bridge_search(pair, erased, max_size.min(erased.len()), tol)?.ok_or(
        Error::NoRobustBridge {
            minimal_redundancy: true,
        },
    )
}

/// First robust `Ω ⊆ Λᶜ` with `|Ω| ≤ max_size`, by increasing size and then
/// lexicographic order.
pub fn exhaustive_bridge_search(
    pair: &DualFramePair,
    erased: &IndexSet,
    max_size: usize,
    tol: &Tolerance,
) -> Result<Option<BridgePlan>> {
    let rest: Vec<usize> = erased.complement().iter().collect();
    for size in 0..=max_size.min(rest.len()) {
        for omega in rest.iter().copied().combinations(size) {
            let bridge = IndexSet::new(pair.len(), omega)?;
            let plan = solve_bridge(pair, erased, &bridge, tol)?;
            if plan.is_robust() {
                return Ok(Some(plan));
            }
        }
    }
    Ok(None)
}
