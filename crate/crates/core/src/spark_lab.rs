//! Dual extension, designer duals, skew-spark audits and genericity sampling.

use itertools::Itertools;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{verify_dual_pair, DualFramePair, Frame, IndexSet};
use crate::numerics::{c, condition_number, numeric_rank_scaled, re, thin_svd, CMatrix, Tolerance};

/// Default cap on the number of bridge matrices one audit may examine.
pub const DEFAULT_AUDIT_BUDGET: u64 = 1_000_000;
/// Condition estimate above which a bridge matrix counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Condition estimate above which an invertible bridge matrix is logged.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e8;
/// Resampling attempts allowed when drawing a full-spark frame.
pub const RESAMPLE_LIMIT: usize = 100;
/// Smallest lower/upper frame-bound ratio accepted for random frames and for
/// the reduced frames used to build null directions.
pub const MIN_BOUND_RATIO: f64 = 1e-6;

fn well_conditioned(frame: &Frame, tol: &Tolerance) -> bool {
    let b = frame.frame_bounds(tol);
    b.is_frame() && b.lower >= MIN_BOUND_RATIO * b.upper
}

/// `min{n, N − n, ⌊N/2⌋}`: no bridge matrix larger than this is invertible.
pub fn erasure_size_bound(n: usize, big_n: usize) -> usize {
    n.min(big_n.saturating_sub(n)).min(big_n / 2)
}

/// Extends `prescribed` (one column per index of `erased`, ascending) to a
/// dual frame of `frame`.
pub fn extend_to_dual(
    frame: &Frame,
    erased: &IndexSet,
    prescribed: &CMatrix,
    tol: &Tolerance,
) -> Result<Frame> {
    erased.check_universe(frame.len())?;
    if prescribed.nrows() != frame.dim() || prescribed.ncols() != erased.len() {
        return Err(Error::DimensionMismatch {
            context: "prescribed vectors must be n x |Λ|",
            expected: erased.len(),
            found: prescribed.ncols(),
        });
    }
    if !frame.minimal_redundancy(erased, tol) {
        return Err(Error::MinimalRedundancyFails);
    }
    let canonical = frame.canonical_dual(tol)?;
    let mut g = canonical.analysis().as_matrix().clone();
    let h_erased = prescribed - g.select_columns(erased.as_slice());
    let h = null_direction(frame, erased, &h_erased, tol)?;
    g += h;
    for (col, j) in erased.iter().enumerate() {
        g.set_column(j, &prescribed.column(col));
    }
    Frame::from_columns(g)
}

/// `H` with `h_j` given on `Λ`, `h_j = −A* k_j` elsewhere, where
/// `A = Σ_{j∈Λ} f_j ⊗ h_j` and `{k_j}` is the canonical dual of `{f_j}_{j∉Λ}`.
/// Then `Σ_j f_j ⊗ h_j = 0`.
fn null_direction(
    frame: &Frame,
    erased: &IndexSet,
    h_erased: &CMatrix,
    tol: &Tolerance,
) -> Result<CMatrix> {
    let rest = erased.complement();
    let a = frame.select(erased) * h_erased.adjoint();
    let f_rest = frame.select(&rest);
    let reduced = Frame::from_columns(f_rest.clone())?;
    let k = reduced.canonical_dual(tol)?.analysis().as_matrix().clone();
    let mut h_rest = -(a.adjoint() * &k);
    let defect = &a + &f_rest * h_rest.adjoint();
    h_rest -= defect.adjoint() * &k;
    let mut h = CMatrix::zeros(frame.dim(), frame.len());
    for (col, j) in erased.iter().enumerate() {
        h.set_column(j, &h_erased.column(col));
    }
    for (col, j) in rest.iter().enumerate() {
        h.set_column(j, &h_rest.column(col));
    }
    Ok(h)
}

/// A dual `G = G₀ + Σ_i w_i H_i` of a frame, with `G₀` the canonical dual
/// and each `H_i` in the null set `{H : Σ f_j ⊗ h_j = 0}`.
#[derive(Clone, Debug)]
pub struct DualPerturbation {
    pub base: CMatrix,
    pub null_vectors: Vec<CMatrix>,
    pub coefficients: Vec<f64>,
}

impl DualPerturbation {
    pub fn dual(&self) -> CMatrix {
        self.null_vectors
            .iter()
            .zip(&self.coefficients)
            .fold(self.base.clone(), |acc, (h, &w)| acc + h * re(w))
    }
}

/// Real or complex coordinates for random frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

fn gaussian(field: Field, rng: &mut impl Rng) -> Complex64 {
    match field {
        Field::Real => re(rng.sample(StandardNormal)),
        Field::Complex => c(rng.sample(StandardNormal), rng.sample(StandardNormal)),
    }
}

fn gaussian_matrix(rows: usize, cols: usize, field: Field, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(field, rng))
}

fn field_of(m: &CMatrix) -> Field {
    if m.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

/// `N` independent standard Gaussian vectors in `n` dimensions.
pub fn random_frame(n: usize, big_n: usize, field: Field, rng: &mut impl Rng) -> Result<Frame> {
    Frame::from_columns(gaussian_matrix(n, big_n, field, rng))
}

/// A Gaussian frame, redrawn until it is full spark with lower/upper bound
/// ratio at least [`MIN_BOUND_RATIO`].
pub fn random_full_spark_frame(
    n: usize,
    big_n: usize,
    field: Field,
    rng: &mut impl Rng,
    tol: &Tolerance,
) -> Result<Frame> {
    for _ in 0..RESAMPLE_LIMIT {
        let f = random_frame(n, big_n, field, rng)?;
        if well_conditioned(&f, tol) && f.is_full_spark(tol)? {
            return Ok(f);
        }
    }
    Err(Error::ResampleLimit(RESAMPLE_LIMIT))
}

/// A random Parseval frame: the orthogonal factor `U V*` of a Gaussian
/// `n × N` matrix.
pub fn random_parseval(n: usize, big_n: usize, field: Field, rng: &mut impl Rng) -> Result<Frame> {
    if big_n < n {
        return Err(Error::InvalidArgument(format!(
            "a Parseval frame for dimension {n} needs at least {n} vectors, got {big_n}"
        )));
    }
    let svd = thin_svd(&gaussian_matrix(n, big_n, field, rng))?;
    Frame::from_columns(svd.u * svd.v.adjoint())
}

/// Random element of the dual set of `frame`, deterministic per `seed`.
pub fn random_dual(frame: &Frame, seed: u64, tol: &Tolerance) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_dual_perturbation(frame, 2, &mut rng, tol)?;
    Frame::from_columns(p.dual())
}

/// Canonical dual plus `directions` random null-set directions. Each direction
/// prescribes Gaussian vectors on a random index set satisfying minimal
/// redundancy and completes them through [`extend_to_dual`]'s construction.
pub fn random_dual_perturbation(
    frame: &Frame,
    directions: usize,
    rng: &mut impl Rng,
    tol: &Tolerance,
) -> Result<DualPerturbation> {
    let base = frame.canonical_dual(tol)?.analysis().as_matrix().clone();
    let field = field_of(frame.as_matrix());
    let (n, big_n) = (frame.dim(), frame.len());
    let mut null_vectors = Vec::new();
    let mut coefficients = Vec::new();
    let redundancy = big_n - n;
    if redundancy > 0 {
        for _ in 0..directions {
            let Some(set) = random_redundant_set(frame, redundancy, rng, tol)? else {
                break;
            };
            let h_erased = gaussian_matrix(n, set.len(), field, rng);
            let h = null_direction(frame, &set, &h_erased, tol)?;
            let norm = h.norm();
            if norm > 0.0 {
                null_vectors.push(h * re(base.norm() / norm));
            } else {
                null_vectors.push(h);
            }
            coefficients.push(rng.sample(StandardNormal));
        }
    }
    let p = DualPerturbation {
        base,
        null_vectors,
        coefficients,
    };
    let check = verify_dual_pair(frame, &Frame::from_columns(p.dual())?, tol)?;
    if !check.is_dual {
        return Err(Error::NotDual {
            residual: check.residual,
        });
    }
    Ok(p)
}

/// A random nonempty index set of size at most `max_size` whose complement
/// is a well-conditioned frame; `None` if none turns up.
fn random_redundant_set(
    frame: &Frame,
    max_size: usize,
    rng: &mut impl Rng,
    tol: &Tolerance,
) -> Result<Option<IndexSet>> {
    let mut order: Vec<usize> = (0..frame.len()).collect();
    for _ in 0..RESAMPLE_LIMIT {
        order.shuffle(rng);
        let size = rng.random_range(1..=max_size);
        // shrink until the complement spans
        for s in (1..=size).rev() {
            let set = IndexSet::new(frame.len(), order[..s].iter().copied())?;
            let rest = Frame::from_columns(frame.select(&set.complement()))?;
            if well_conditioned(&rest, tol) {
                return Ok(Some(set));
            }
        }
    }
    Ok(None)
}

/// Gaussian frame with a random dual. Frames with lower/upper bound ratio
/// below [`MIN_BOUND_RATIO`] are redrawn.
pub fn random_dual_pair(
    n: usize,
    big_n: usize,
    field: Field,
    rng: &mut impl Rng,
    tol: &Tolerance,
) -> Result<DualFramePair> {
    for _ in 0..RESAMPLE_LIMIT {
        let f = random_frame(n, big_n, field, rng)?;
        if !well_conditioned(&f, tol) {
            continue;
        }
        let g = random_dual(&f, rng.random(), tol)?;
        return DualFramePair::new(f, g, tol);
    }
    Err(Error::ResampleLimit(RESAMPLE_LIMIT))
}

/// Dual of a full-spark frame whose bridge matrix `B(Λ, Ω)` is the Gram matrix
/// of `{f_j}_{j∈Λ}`: `g_{ω_i} = f_{λ_i}` for the ascending orders of `Ω` and
/// `Λ`, extended to a dual on `Ω`.
pub fn designer_dual(
    frame: &Frame,
    erased: &IndexSet,
    bridge: &IndexSet,
    tol: &Tolerance,
) -> Result<DualFramePair> {
    erased.check_universe(frame.len())?;
    bridge.check_universe(frame.len())?;
    if erased.len() != bridge.len() {
        return Err(Error::InvalidArgument(format!(
            "erasure set {erased} and bridge set {bridge} differ in size"
        )));
    }
    if !erased.is_disjoint(bridge) {
        return Err(Error::InvalidArgument(format!(
            "erasure set {erased} and bridge set {bridge} overlap"
        )));
    }
    let bound = erasure_size_bound(frame.dim(), frame.len());
    if erased.len() > bound {
        return Err(Error::InvalidArgument(format!(
            "{} erasures exceed the bound {bound} for n={}, N={}",
            erased.len(),
            frame.dim(),
            frame.len()
        )));
    }
    let spark = frame.spark(tol)?;
    if spark != frame.dim() {
        return Err(Error::NotFullSpark {
            spark,
            dim: frame.dim(),
        });
    }
    let prescribed = frame.select(erased);
    let g = extend_to_dual(frame, bridge, &prescribed, tol)?;
    DualFramePair::new(frame.clone(), g, tol)
}

/// One bridge matrix examined by an audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditEntry {
    pub erased: IndexSet,
    pub bridge: IndexSet,
    pub rank: usize,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewSparkReport {
    pub pair_id: String,
    /// Highest level examined completely.
    pub k_checked: usize,
    /// Largest `k` such that every bridge matrix of size at most `k` passed.
    pub skew_spark: usize,
    /// `min{n, N − n, ⌊N/2⌋}`.
    pub bound: usize,
    pub full: bool,
    /// False when the budget stopped the audit early.
    pub complete: bool,
    pub failures: Vec<AuditEntry>,
    /// Invertible bridge matrices with condition above
    /// [`NEAR_SINGULAR_CONDITION`].
    pub near_singular: Vec<AuditEntry>,
    pub worst_condition: f64,
    pub matrices_checked: u64,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| {
        acc.saturating_mul((n - i) as u64) / (i as u64 + 1)
    })
}

/// Number of bridge matrices with `|Λ| = |Ω| = k` over `N` indices.
pub fn audit_level_size(big_n: usize, k: usize) -> u64 {
    binomial(big_n, k).saturating_mul(binomial(big_n.saturating_sub(k), k))
}

pub fn skew_spark_audit(pair: &DualFramePair, k_max: usize, tol: &Tolerance) -> SkewSparkReport {
    skew_spark_audit_with_budget(pair, k_max, DEFAULT_AUDIT_BUDGET, tol)
}

/// Checks every `B(Λ, Ω)` with `|Λ| = |Ω| = k` for `k = 1, 2, …, k_max`,
/// stopping after the first level with a failure. A matrix fails when its
/// numeric rank is below `k` or its condition exceeds [`SINGULAR_CONDITION`].
pub fn skew_spark_audit_with_budget(
    pair: &DualFramePair,
    k_max: usize,
    budget: u64,
    tol: &Tolerance,
) -> SkewSparkReport {
    let big_n = pair.len();
    let bound = erasure_size_bound(pair.dim(), big_n);
    let k_max = k_max.min(big_n / 2);
    let f = pair.synthesis().as_matrix();
    let g = pair.analysis().as_matrix();
    let scale = pair.synthesis().max_vector_norm() * pair.analysis().max_vector_norm();
    let mut report = SkewSparkReport {
        pair_id: String::new(),
        k_checked: 0,
        skew_spark: 0,
        bound,
        full: false,
        complete: true,
        failures: Vec::new(),
        near_singular: Vec::new(),
        worst_condition: 1.0,
        matrices_checked: 0,
    };
    for k in 1..=k_max {
        let level = audit_level_size(big_n, k);
        if report.matrices_checked.saturating_add(level) > budget {
            report.complete = false;
            break;
        }
        for lam in (0..big_n).combinations(k) {
            let rest: Vec<usize> = (0..big_n).filter(|j| !lam.contains(j)).collect();
            let f_lam = f.select_columns(lam.as_slice());
            for om in rest.into_iter().combinations(k) {
                let b = f_lam.transpose() * g.select_columns(om.as_slice()).conjugate();
                let rank = numeric_rank_scaled(&b, scale, tol);
                let condition = condition_number(&b);
                report.worst_condition = report.worst_condition.max(condition);
                report.matrices_checked += 1;
                let entry = || AuditEntry {
                    erased: IndexSet::new(big_n, lam.iter().copied()).expect("in range"),
                    bridge: IndexSet::new(big_n, om.iter().copied()).expect("in range"),
                    rank,
                    condition,
                };
                if rank < k || condition > SINGULAR_CONDITION {
                    report.failures.push(entry());
                } else if condition > NEAR_SINGULAR_CONDITION {
                    report.near_singular.push(entry());
                }
            }
        }
        report.k_checked = k;
        if !report.failures.is_empty() {
            break;
        }
        report.skew_spark = k;
    }
    report.full = report.skew_spark == bound;
    report
}

/// One genericity trial, as emitted in CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub big_n: usize,
    pub k: usize,
    pub failures: usize,
    pub worst_condition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericityStats {
    pub records: Vec<TrialRecord>,
    /// Fraction of trials with at least one failing bridge matrix.
    pub failure_frequency: f64,
    pub worst_condition: f64,
}

impl GenericityStats {
    fn from_records(records: Vec<TrialRecord>) -> Self {
        let failed = records.iter().filter(|r| r.failures > 0).count();
        let failure_frequency = if records.is_empty() {
            0.0
        } else {
            failed as f64 / records.len() as f64
        };
        let worst_condition = records
            .iter()
            .map(|r| r.worst_condition)
            .fold(0.0, f64::max);
        Self {
            records,
            failure_frequency,
            worst_condition,
        }
    }
}

/// Random generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Audits `trials` random full-spark frames with random duals to level `k`.
pub fn genericity_trial(
    n: usize,
    big_n: usize,
    trials: usize,
    k: usize,
    seed: u64,
    field: Field,
    tol: &Tolerance,
) -> Result<GenericityStats> {
    if n == 0 || big_n < n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n <= N, got n={n}, N={big_n}"
        )));
    }
    let bound = erasure_size_bound(n, big_n);
    if k > bound {
        return Err(Error::InvalidArgument(format!(
            "audit level {k} exceeds the erasure bound {bound}"
        )));
    }
    genericity_trial_with(trials, k, seed, tol, |rng| {
        let f = random_full_spark_frame(n, big_n, field, rng, tol)?;
        let g = random_dual(&f, rng.random(), tol)?;
        DualFramePair::new(f, g, tol)
    })
}

/// Runs the audit on pairs drawn by `sample`, one independent stream per
/// trial, in parallel.
pub fn genericity_trial_with<S>(
    trials: usize,
    k: usize,
    seed: u64,
    tol: &Tolerance,
    sample: S,
) -> Result<GenericityStats>
where
    S: Fn(&mut ChaCha8Rng) -> Result<DualFramePair> + Sync,
{
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let pair = sample(&mut rng)?;
            let report = skew_spark_audit(&pair, k, tol);
            Ok(TrialRecord {
                trial,
                n: pair.dim(),
                big_n: pair.len(),
                k,
                failures: report.failures.len(),
                worst_condition: report.worst_condition,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GenericityStats::from_records(records))
}
