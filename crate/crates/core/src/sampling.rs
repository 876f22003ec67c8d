//! Erasure recovery for sampling schemes.
//!
//! For a sampling scheme the frame coefficients are point samples
//! `f(t_j) = ⟨f, g_j⟩`, and every bridge matrix is a slice of the table of
//! synthesis functions evaluated at the sample points, `(f_j(t_k))`. The
//! erased samples are recovered from that table alone.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::{DualFramePair, ErasedCoefficients, Frame, IndexSet};
use crate::numerics::{
    c, numeric_rank_scaled, re, solve_least_squares_scaled, CMatrix, CVector, Tolerance,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    TrigPoly,
    TruncatedShannon,
    Custom,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::TrigPoly => "trig_poly",
            SchemeKind::TruncatedShannon => "truncated_shannon",
            SchemeKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trig_poly" => Some(SchemeKind::TrigPoly),
            "truncated_shannon" => Some(SchemeKind::TruncatedShannon),
            "custom" => Some(SchemeKind::Custom),
            _ => None,
        }
    }
}

/// A grid point `t = index · spacing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint {
    pub index: i64,
    pub spacing: f64,
}

impl SamplePoint {
    pub fn t(&self) -> f64 {
        self.index as f64 * self.spacing
    }
}

/// A finite sampling scheme: sample points, the table `f_j(t_k)`, and the
/// weight `w` in the reconstruction identity `f = w Σ_j f(t_j) f_j`.
#[derive(Clone, Debug)]
pub struct SamplingScheme {
    kind: SchemeKind,
    points: Vec<SamplePoint>,
    value_table: CMatrix,
    space_dim: usize,
    synthesis_weight: f64,
    pair: Option<DualFramePair>,
}

/// Frequencies of the `n`-dimensional trigonometric polynomial space,
/// `{-⌊(n−1)/2⌋, …, ⌈(n−1)/2⌉}`.
pub fn trig_frequencies(n: usize) -> Vec<i64> {
    let n = n as i64;
    let lo = -(n - 1) / 2;
    (lo..lo + n).collect()
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `e^{2πi·num/den}` with the numerator reduced modulo `den` first.
fn root_of_unity(num: i64, den: i64) -> Complex64 {
    let r = num.rem_euclid(den);
    let angle = 2.0 * PI * r as f64 / den as f64;
    c(angle.cos(), angle.sin())
}

/// Trigonometric polynomials `Σ_m a_m e^{2πimt}` of dimension `n` on `[0,1)`,
/// sampled at `t_k = k/N`, `k = 0..N`.
///
/// Point evaluation at `t_k` is `⟨f, g_k⟩` with `g_k = (e^{−2πimt_k})_m`; these
/// form a tight frame with bound `N`, so `f_k = g_k / N` is its canonical dual.
pub fn build_trig_scheme(n: usize, count: usize) -> Result<SamplingScheme> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "trigonometric space dimension must be positive".into(),
        ));
    }
    if count < n {
        return Err(Error::InvalidArgument(format!(
            "underdetermined scheme: {count} samples for a space of dimension {n}"
        )));
    }
    let freqs = trig_frequencies(n);
    let big_n = count as i64;
    let g = CMatrix::from_fn(n, count, |m, k| root_of_unity(-freqs[m] * k as i64, big_n));
    let f = g.map(|z| z / count as f64);
    // f_j(t_k) = (1/N) Σ_m e^{2πim(k−j)/N}
    let table = CMatrix::from_fn(count, count, |j, k| {
        freqs
            .iter()
            .map(|&m| root_of_unity(m * (k as i64 - j as i64), big_n))
            .sum::<Complex64>()
            / count as f64
    });
    let pair = DualFramePair::new(
        Frame::from_columns(f)?,
        Frame::from_columns(g)?,
        &Tolerance::default(),
    )?;
    Ok(SamplingScheme {
        kind: SchemeKind::TrigPoly,
        points: (0..big_n)
            .map(|k| SamplePoint {
                index: k,
                spacing: 1.0 / count as f64,
            })
            .collect(),
        value_table: table,
        space_dim: n,
        synthesis_weight: 1.0,
        pair: Some(pair),
    })
}

/// Shannon sampling on `pℤ` truncated to indices `−K..=K`, with table
/// `sinc(π(j − k)p)`. Reconstruction carries the weight `p`:
/// `f(t) = p Σ_j f(jp) sinc(π(t − jp))`. Truncation makes recovery approximate.
pub fn build_truncated_shannon(spacing: f64, half_width: usize) -> Result<SamplingScheme> {
    if !(spacing > 0.0 && spacing <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "spacing must lie in (0, 1], got {spacing}"
        )));
    }
    if half_width == 0 {
        return Err(Error::InvalidArgument(
            "truncation half-width must be at least 1".into(),
        ));
    }
    let k = half_width as i64;
    let points: Vec<SamplePoint> = (-k..=k)
        .map(|index| SamplePoint { index, spacing })
        .collect();
    let len = points.len();
    let table = CMatrix::from_fn(len, len, |a, b| {
        let diff = (points[a].index - points[b].index) as f64;
        re(sinc(PI * diff * spacing))
    });
    Ok(SamplingScheme {
        kind: SchemeKind::TruncatedShannon,
        points,
        value_table: table,
        space_dim: len,
        synthesis_weight: spacing,
        pair: None,
    })
}

impl SamplingScheme {
    /// A scheme given directly by its value table.
    pub fn custom(
        points: Vec<SamplePoint>,
        value_table: CMatrix,
        space_dim: usize,
        synthesis_weight: f64,
    ) -> Result<Self> {
        if value_table.nrows() != points.len() || value_table.ncols() != points.len() {
            return Err(Error::DimensionMismatch {
                context: "value table must be N x N for N sample points",
                expected: points.len(),
                found: value_table.nrows(),
            });
        }
        if !crate::numerics::is_finite(&value_table) || !synthesis_weight.is_finite() {
            return Err(Error::NonFinite("sampling value table"));
        }
        Ok(Self {
            kind: SchemeKind::Custom,
            points,
            value_table,
            space_dim,
            synthesis_weight,
            pair: None,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    /// `(f_j(t_k))_{j,k}`.
    pub fn value_table(&self) -> &CMatrix {
        &self.value_table
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn synthesis_weight(&self) -> f64 {
        self.synthesis_weight
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The dual pair `(F, G)` in coordinates, when the scheme has one
    /// (trigonometric schemes).
    pub fn induced_pair(&self) -> Option<&DualFramePair> {
        self.pair.as_ref()
    }

    /// Position of the sample with grid index `index`.
    pub fn position_of(&self, index: i64) -> Option<usize> {
        self.points.iter().position(|p| p.index == index)
    }

    /// Index set from grid indices (e.g. `−K..=K` for Shannon schemes).
    pub fn index_set(&self, grid_indices: &[i64]) -> Result<IndexSet> {
        let positions = grid_indices
            .iter()
            .map(|&i| {
                self.position_of(i).ok_or(Error::InvalidArgument(format!(
                    "no sample point with grid index {i}"
                )))
            })
            .collect::<Result<Vec<_>>>()?;
        IndexSet::new(self.len(), positions)
    }

    fn table_scale(&self) -> f64 {
        self.value_table
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `B(Λ, Ω) = (f_j(t_k))_{j∈Λ, k∈Ω}`.
pub fn sampling_bridge_matrix(
    scheme: &SamplingScheme,
    erased: &IndexSet,
    bridge: &IndexSet,
) -> Result<CMatrix> {
    erased.check_universe(scheme.len())?;
    bridge.check_universe(scheme.len())?;
    if !erased.is_disjoint(bridge) {
        return Err(Error::InvalidArgument(format!(
            "erasure set {erased} and bridge set {bridge} overlap"
        )));
    }
    Ok(scheme
        .value_table
        .select_rows(erased.as_slice())
        .select_columns(bridge.as_slice()))
}

/// Recovered samples on `Λ` together with the bridging data used.
#[derive(Clone, Debug)]
pub struct SampleRecovery {
    /// Recovered `f(t_j)` for `j ∈ Λ`, ascending.
    pub values: CVector,
    pub coefficients: CMatrix,
    pub bridge: IndexSet,
    pub residual: f64,
    /// `f_R(t_j)` for every sample point.
    pub partial: CVector,
    /// Truncated Shannon only: largest known sample magnitude at the two
    /// truncation endpoints, an indicator of the neglected tail.
    pub truncation_indicator: Option<f64>,
}

/// Greedy bridge set for a sampling scheme. Candidates in `Λᶜ` are taken
/// nearest first (grid distance to `Λ`, ties ascending) and kept when they
/// raise the rank of `B(Λ, Ω)`, until that rank matches the rank of the rows
/// `Λ` of the value table.
pub fn find_sampling_bridge(
    scheme: &SamplingScheme,
    erased: &IndexSet,
    tol: &Tolerance,
) -> Result<IndexSet> {
    erased.check_universe(scheme.len())?;
    let scale = scheme.table_scale();
    let rows = scheme.value_table.select_rows(erased.as_slice());
    let target = numeric_rank_scaled(&rows, scale, tol);
    let mut chosen = Vec::new();
    let mut rank = 0;
    let mut candidates: Vec<usize> = erased.complement().iter().collect();
    candidates.sort_by_key(|&j| {
        let distance = erased
            .iter()
            .map(|e| scheme.points[e].index.abs_diff(scheme.points[j].index))
            .min()
            .unwrap_or(0);
        (distance, j)
    });
    for j in candidates {
        if rank >= target {
            break;
        }
        chosen.push(j);
        let r = numeric_rank_scaled(&rows.select_columns(chosen.as_slice()), scale, tol);
        if r > rank {
            rank = r;
        } else {
            chosen.pop();
        }
    }
    IndexSet::new(scheme.len(), chosen)
}

/// Recovers erased samples from the known ones:
/// `(f(t_j))_{j∈Λ} = C^T((f(t_j))_Ω − (f_R(t_j))_Ω) + (f_R(t_j))_Λ`.
pub fn recover_samples(
    scheme: &SamplingScheme,
    erased: &IndexSet,
    bridge: &IndexSet,
    known: &ErasedCoefficients,
    tol: &Tolerance,
) -> Result<SampleRecovery> {
    let b = sampling_bridge_matrix(scheme, erased, bridge)?;
    if known.len() != scheme.len() {
        return Err(Error::DimensionMismatch {
            context: "sample list length",
            expected: scheme.len(),
            found: known.len(),
        });
    }
    let mut samples = CVector::zeros(scheme.len());
    for (j, v) in known.iter().enumerate() {
        if !erased.contains(j) {
            samples[j] = v.ok_or(Error::MissingCoefficient(j + 1))?;
        }
    }
    let target = scheme
        .value_table
        .select_rows(erased.as_slice())
        .select_columns(erased.as_slice());
    let ls = solve_least_squares_scaled(&b, &target, scheme.table_scale(), tol)?;
    if !ls.consistent {
        return Err(Error::NoRobustBridge {
            minimal_redundancy: false,
        });
    }
    // f_R(t_k) = w Σ_{j∉Λ} f(t_j) f_j(t_k)
    let partial = scheme.value_table.transpose() * &samples * re(scheme.synthesis_weight);
    let known_bridge = samples.select_rows(bridge.as_slice());
    let partial_bridge = partial.select_rows(bridge.as_slice());
    let partial_erased = partial.select_rows(erased.as_slice());
    let values = ls.solution.transpose() * (known_bridge - partial_bridge) + partial_erased;

    let truncation_indicator = (scheme.kind == SchemeKind::TruncatedShannon).then(|| {
        let last = scheme.len() - 1;
        [0, last]
            .iter()
            .filter(|&&j| !erased.contains(j))
            .map(|&j| samples[j].norm())
            .fold(0.0, f64::max)
    });
    Ok(SampleRecovery {
        values,
        coefficients: ls.solution,
        bridge: bridge.clone(),
        residual: ls.residual,
        partial,
        truncation_indicator,
    })
}
