mod common;

use common::*;
use framebridge::bridging::is_robust_by_rank;
use framebridge::numerics::{eigenvalues, invert, numeric_rank, solve_least_squares};
use framebridge::sampling::find_sampling_bridge;
use framebridge::spark_lab::{
    random_dual_pair, random_frame, random_full_spark_frame, random_parseval, trial_rng,
};
use framebridge::{
    bridge_matrix, build_trig_scheme, designer_dual, erase, erasure_size_bound, error_operator,
    extend_to_dual, find_bridge_set, fixtures, invert_partial_reconstruction, random_dual,
    recover_samples, skew_spark_audit, solve_bridge, CMatrix, DualFramePair, Error, Field, Frame,
    IndexSet, Tolerance,
};
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let v = gaussian_vector(rows * cols, rng);
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    gaussian_matrix(n, n, rng).qr().q()
}

fn frame_with_good_bounds(n: usize, big_n: usize, rng: &mut ChaCha8Rng) -> Frame {
    loop {
        let f = random_frame(n, big_n, Field::Complex, rng).unwrap();
        let b = f.frame_bounds(&tol());
        if b.lower >= 1e-6 * b.upper {
            return f;
        }
    }
}

fn field(seed: u64) -> Field {
    if seed.is_multiple_of(2) {
        Field::Complex
    } else {
        Field::Real
    }
}

/// Random pair with `1 ≤ n ≤ max_n < N ≤ max_big_n` and a random erasure set
/// satisfying minimal redundancy.
fn redundant_instance(
    seed: u64,
    max_n: usize,
    max_big_n: usize,
) -> (DualFramePair, IndexSet, ChaCha8Rng) {
    let mut rng = trial_rng(seed, 1);
    let n = rng.random_range(1..=max_n);
    let big_n = rng.random_range(n + 1..=max_big_n);
    let pair = random_dual_pair(n, big_n, field(seed), &mut rng, &tol()).unwrap();
    loop {
        let size = rng.random_range(1..=big_n - n);
        let lam = random_subset(big_n, size, &mut rng);
        if spans_without(&pair, &lam) {
            return (pair, lam, rng);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_of_well_conditioned(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = trial_rng(seed, 0);
        let a = CMatrix::identity(n, n) * cz(3.0, 0.0) + gaussian_matrix(n, n, &mut rng) * cz(0.3, 0.0);
        let inv = invert(&a, &tol()).unwrap();
        prop_assert!((inv * &a - CMatrix::identity(n, n)).norm() <= 1e-10 * (n as f64).sqrt());
    }

    #[test]
    fn least_squares_consistent_in_range(seed in any::<u64>(), m in 1usize..7, k in 1usize..7, p in 1usize..4) {
        let mut rng = trial_rng(seed, 0);
        let a = gaussian_matrix(m, k, &mut rng);
        let x0 = gaussian_matrix(k, p, &mut rng);
        let b = &a * x0;
        let ls = solve_least_squares(&a, &b, &tol()).unwrap();
        prop_assert!(ls.consistent);
        prop_assert!(ls.residual <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn rank_is_permutation_invariant(seed in any::<u64>(), m in 1usize..7, k in 1usize..7, r in 0usize..4) {
        let mut rng = trial_rng(seed, 0);
        let r = r.min(m).min(k);
        let a = gaussian_matrix(m, r, &mut rng) * gaussian_matrix(r, k, &mut rng);
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..k).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let permuted = a.select_rows(rows.iter()).select_columns(cols.iter());
        prop_assert_eq!(numeric_rank(&a, &tol()), r);
        prop_assert_eq!(numeric_rank(&permuted, &tol()), r);
    }

    #[test]
    fn nilpotent_eigenvalues_vanish(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = trial_rng(seed, 0);
        let g = gaussian_matrix(n, n, &mut rng);
        let t = CMatrix::from_fn(n, n, |i, j| if j > i { g[(i, j)] } else { cz(0.0, 0.0) });
        let ev = eigenvalues(&t).unwrap();
        prop_assert_eq!(ev.len(), n);
        prop_assert!(ev.iter().all(|z| z.norm() <= 1e-10), "{:?}", ev);
    }

    #[test]
    fn frame_operator_hermitian_psd(seed in any::<u64>(), n in 1usize..6, extra in 0usize..5) {
        let mut rng = trial_rng(seed, 0);
        let f = random_frame(n, n + extra, field(seed), &mut rng).unwrap();
        let s = f.frame_operator();
        let norm = spectral_norm(&s);
        prop_assert!((&s - s.adjoint()).norm() <= 1e-12 * norm);
        let min = s.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-12 * norm);
    }

    #[test]
    fn canonical_dual_is_dual(seed in any::<u64>(), n in 1usize..6, extra in 0usize..5) {
        let mut rng = trial_rng(seed, 0);
        let f = frame_with_good_bounds(n, n + extra, &mut rng);
        let pair = f.canonical_dual(&tol()).unwrap();
        let check = framebridge::verify_dual_pair(pair.synthesis(), pair.analysis(), &tol()).unwrap();
        prop_assert!(check.is_dual);
        prop_assert!(duality_defect(f.as_matrix(), pair.analysis().as_matrix()) <= 1e-9);
    }

    #[test]
    fn parseval_is_self_dual(seed in any::<u64>(), n in 1usize..6, extra in 0usize..5) {
        let mut rng = trial_rng(seed, 0);
        let f = random_parseval(n, n + extra, field(seed), &mut rng).unwrap();
        let dual = f.canonical_dual(&tol()).unwrap();
        prop_assert!(max_abs((dual.analysis().as_matrix() - f.as_matrix()).iter().copied()) <= 1e-12);
    }

    #[test]
    fn analysis_synthesis_adjoint(seed in any::<u64>(), n in 1usize..6, extra in 0usize..5) {
        let mut rng = trial_rng(seed, 0);
        let f = random_frame(n, n + extra, Field::Complex, &mut rng).unwrap();
        let x = gaussian_vector(n, &mut rng);
        let c = gaussian_vector(n + extra, &mut rng);
        let lhs = c.dotc(&f.analysis(&x).unwrap());
        let rhs = f.synthesis(&c).unwrap().dotc(&x);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()) * (n + extra) as f64);
    }

    #[test]
    fn spark_bounded_and_unitarily_invariant(seed in any::<u64>(), n in 1usize..5, extra in 0usize..4, repeats in 0usize..2) {
        let mut rng = trial_rng(seed, 0);
        let base = random_frame(n, n + extra, field(seed), &mut rng).unwrap();
        let mut m = base.as_matrix().clone();
        if repeats == 1 {
            let first = m.column(0).into_owned();
            m = m.insert_column(0, cz(0.0, 0.0));
            m.set_column(0, &first);
        }
        let f = Frame::from_columns(m.clone()).unwrap();
        let u = random_unitary(n, &mut rng);
        let rotated = Frame::from_columns(u * m).unwrap();
        let spark = f.spark(&tol()).unwrap();
        prop_assert!(spark <= n);
        prop_assert_eq!(spark, rotated.spark(&tol()).unwrap());
        if repeats == 1 {
            prop_assert!(spark <= 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn robust_plans_reconstruct(seed in any::<u64>()) {
        let (pair, lam, mut rng) = redundant_instance(seed, 6, 12);
        let plan = find_bridge_set(&pair, &lam, &tol(), pair.len()).unwrap();
        prop_assert!(plan.is_robust());
        let e = plan.reduced_error_operator();
        let e_norm = spectral_norm(&e);
        prop_assert!(spectral_norm(&(&e * &e)) <= 1e-9 * (1.0 + e_norm * e_norm));

        let f = pair.synthesis().as_matrix();
        let h = pair.analysis().select(&lam) - plan.bridged_vectors();
        for (a, j) in lam.iter().enumerate() {
            for b in 0..lam.len() {
                let fj = f.column(j);
                let hk = h.column(b);
                let ip = hk.dotc(&fj);
                prop_assert!(ip.norm() <= 1e-9 * (1.0 + fj.norm() * hk.norm()), "entry ({a},{b})");
            }
        }

        let x = gaussian_vector(pair.dim(), &mut rng);
        let alpha = analysis_coefficients(pair.analysis().as_matrix(), &x);
        let report = plan.reconstruct_vector(&erase(&alpha, &lam)).unwrap();
        let recovered = report.recovered_vector.clone().unwrap();
        prop_assert!((recovered - &x).norm() <= 1e-8 * (1.0 + x.norm()));
        let f_b = report.supplement.unwrap();
        prop_assert!((&e * &f_b).norm() <= 1e-9 * (1.0 + e_norm * f_b.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_criterion_sufficient(seed in any::<u64>(), parseval in any::<bool>()) {
        let mut rng = trial_rng(seed, 2);
        let n = rng.random_range(1..=4);
        let big_n = rng.random_range(n + 2..=8);
        let pair = if parseval {
            let f = random_parseval(n, big_n, field(seed), &mut rng).unwrap();
            DualFramePair::new(f.clone(), f, &tol()).unwrap()
        } else {
            random_dual_pair(n, big_n, field(seed), &mut rng, &tol()).unwrap()
        };
        let lam = random_subset(big_n, rng.random_range(1..big_n), &mut rng);
        let rest: Vec<usize> = lam.complement().iter().collect();
        let size = rng.random_range(1..=rest.len());
        let om = IndexSet::new(big_n, rest.choose_multiple(&mut rng, size).copied()).unwrap();
        let by_rank = is_robust_by_rank(&pair, &lam, &om, &tol()).unwrap();
        let solved = solve_bridge(&pair, &lam, &om, &tol()).unwrap().is_robust();
        if by_rank {
            prop_assert!(solved);
        }
        if parseval {
            prop_assert_eq!(by_rank, solved);
        }
    }

    #[test]
    fn truncated_bridges_lose_eigenvalues(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 3);
        let l = rng.random_range(2..=3);
        let n = rng.random_range(l..=5);
        let big_n = rng.random_range(n + l..=n + l + 2);
        let pair = random_dual_pair(n, big_n, Field::Complex, &mut rng, &tol()).unwrap();
        let lam = random_subset(big_n, l, &mut rng);
        let plan = find_bridge_set(&pair, &lam, &tol(), l).unwrap();
        let m = rng.random_range(0..plan.bridge().len());
        let cut = plan.truncated(m, &tol()).unwrap();
        prop_assert!(cut.nonzero_eigenvalue_count(&tol()).unwrap() <= l - m);
    }

    #[test]
    fn inverse_form_matches_dense_or_rank_drops(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 4);
        let n = rng.random_range(1..=5);
        let big_n = rng.random_range(n + 1..=9);
        let pair = random_dual_pair(n, big_n, field(seed), &mut rng, &tol()).unwrap();
        let lam = random_subset(big_n, rng.random_range(1..=big_n), &mut rng);
        let r = direct_partial(&pair, &lam);
        match invert_partial_reconstruction(&pair, &lam, &tol()) {
            Ok(form) => {
                let oracle = gauss_jordan_inverse(&r).expect("oracle finds R singular");
                prop_assert!((form.expand() - &oracle).norm() <= 1e-8 * oracle.norm());
            }
            Err(Error::NotInvertible { .. }) => {
                let scale = spectral_norm(pair.synthesis().as_matrix()) * spectral_norm(pair.analysis().as_matrix());
                prop_assert!(svd_rank(&r, scale) < n);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn nilpotent_error_inverts_to_identity_plus_error(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 5);
        let n = rng.random_range(2..=5);
        let big_n = rng.random_range(n + 1..=n + 4);
        let l = rng.random_range(1..=(n - 1).min(big_n - n));
        let f = random_full_spark_frame(n, big_n, Field::Complex, &mut rng, &tol()).unwrap();
        let lam = random_subset(big_n, l, &mut rng);
        // analysis vectors on Λ orthogonal to span{f_j : j ∈ Λ}
        let q = f.select(&lam).qr().q();
        let raw = gaussian_matrix(n, l, &mut rng);
        let prescribed = &raw - &q * (q.adjoint() * &raw);
        let g = extend_to_dual(&f, &lam, &prescribed, &tol()).unwrap();
        let pair = DualFramePair::new(f, g, &tol()).unwrap();
        let e = error_operator(&pair, &lam).unwrap();
        prop_assert!((&e * &e).norm() <= 1e-10 * (1.0 + e.norm() * e.norm()));
        let form = invert_partial_reconstruction(&pair, &lam, &tol()).unwrap();
        let expected = CMatrix::identity(n, n) + &e;
        prop_assert!(max_abs((form.expand() - expected).iter().copied()) <= 1e-10 * (1.0 + e.norm()));
    }

    #[test]
    fn trig_identity_and_paths_agree(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 6);
        let n = rng.random_range(1..=6);
        let big_n = rng.random_range(n..=n + 5);
        let scheme = build_trig_scheme(n, big_n).unwrap();
        let pair = scheme.induced_pair().unwrap().clone();
        let a = gaussian_vector(n, &mut rng);
        let samples = analysis_coefficients(pair.analysis().as_matrix(), &a);
        let back = pair.synthesis().synthesis(&samples).unwrap();
        prop_assert!((back - &a).norm() <= 1e-10 * (1.0 + a.norm()));

        if big_n > n {
            let lam = random_subset(big_n, rng.random_range(1..=big_n - n), &mut rng);
            let om = find_sampling_bridge(&scheme, &lam, &tol()).unwrap();
            let rec = recover_samples(&scheme, &lam, &om, &erase(&samples, &lam), &tol()).unwrap();
            let expected = samples.select_rows(lam.as_slice());
            prop_assert!((&rec.values - &expected).norm() <= 1e-8 * (1.0 + expected.norm()));
            let generic = solve_bridge(&pair, &lam, &om, &tol())
                .unwrap()
                .recover_coefficients(&erase(&samples, &lam))
                .unwrap();
            prop_assert!((&rec.values - generic).norm() <= 1e-10 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn extension_matches_prescriptions(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 7);
        let n = rng.random_range(1..=5);
        let big_n = rng.random_range(n + 1..=n + 5);
        let f = random_full_spark_frame(n, big_n, field(seed), &mut rng, &tol()).unwrap();
        let lam = random_subset(big_n, rng.random_range(1..=big_n - n), &mut rng);
        let prescribed = gaussian_matrix(n, lam.len(), &mut rng);
        let g = extend_to_dual(&f, &lam, &prescribed, &tol()).unwrap();
        prop_assert!(duality_defect(f.as_matrix(), g.as_matrix()) <= 1e-9);
        prop_assert!(max_abs((g.select(&lam) - prescribed).iter().copied()) <= 1e-12);
    }

    #[test]
    fn skew_spark_implies_spark(seed in any::<u64>(), kind in 0usize..3) {
        let mut rng = trial_rng(seed, 8);
        let n = rng.random_range(1..=3);
        let big_n = rng.random_range(n + 1..=6);
        let pair = match kind {
            0 => random_dual_pair(n, big_n, field(seed), &mut rng, &tol()).unwrap(),
            1 => {
                let f = random_frame(n, big_n, Field::Real, &mut rng).unwrap();
                let mut m = f.as_matrix().clone();
                let first = m.column(0).into_owned();
                m.set_column(big_n - 1, &first);
                let f = Frame::from_columns(m).unwrap();
                if !f.frame_bounds(&tol()).is_frame() {
                    return Ok(());
                }
                let g = random_dual(&f, rng.random(), &tol()).unwrap();
                DualFramePair::new(f, g, &tol()).unwrap()
            }
            _ => fixtures::paper_2d(),
        };
        let report = skew_spark_audit(&pair, pair.len() / 2, &tol());
        prop_assert!(report.skew_spark <= report.bound);
        prop_assert_eq!(report.failures.is_empty(), report.skew_spark >= report.k_checked);
        let k = report.skew_spark;
        prop_assert!(pair.synthesis().spark(&tol()).unwrap() >= k);
        prop_assert!(pair.analysis().spark(&tol()).unwrap() >= k);
    }

    #[test]
    fn designer_bridge_is_invertible(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 9);
        let n = rng.random_range(1..=4);
        let big_n = rng.random_range(n + 1..=8);
        let bound = erasure_size_bound(n, big_n);
        let f = random_full_spark_frame(n, big_n, field(seed), &mut rng, &tol()).unwrap();
        let k = rng.random_range(1..=bound);
        let picked = random_subset(big_n, 2 * k, &mut rng);
        let mut order: Vec<usize> = picked.iter().collect();
        order.shuffle(&mut rng);
        let lam = IndexSet::new(big_n, order[..k].iter().copied()).unwrap();
        let om = IndexSet::new(big_n, order[k..].iter().copied()).unwrap();
        let pair = designer_dual(&f, &lam, &om, &tol()).unwrap();
        let b = bridge_matrix(&pair, &lam, &om).unwrap();
        prop_assert_eq!(numeric_rank(&b, &tol()), k);
        prop_assert!(duality_defect(pair.synthesis().as_matrix(), pair.analysis().as_matrix()) <= 1e-9);
    }

    #[test]
    fn convex_combinations_of_duals(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 10);
        let n = rng.random_range(1..=4);
        let big_n = rng.random_range(n..=n + 4);
        let f = frame_with_good_bounds(n, big_n, &mut rng);
        let g0 = random_dual(&f, rng.random(), &tol()).unwrap();
        let g1 = random_dual(&f, rng.random(), &tol()).unwrap();
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let g = g0.as_matrix() * cz(1.0 - t, 0.0) + g1.as_matrix() * cz(t, 0.0);
            let g = Frame::from_columns(g).unwrap();
            prop_assert!(framebridge::verify_dual_pair(&f, &g, &tol()).unwrap().is_dual);
        }
    }
}

#[test]
fn rational_inputs_give_exact_inverses() {
    let pair = fixtures::paper_2d();
    for size in 1..=2 {
        for lam in itertools::Itertools::combinations(0..4, size) {
            let lam = IndexSet::new(4, lam).unwrap();
            let r = direct_partial(&pair, &lam);
            let Some(oracle) = gauss_jordan_inverse(&r) else {
                assert!(invert_partial_reconstruction(&pair, &lam, &tol()).is_err());
                continue;
            };
            let form = invert_partial_reconstruction(&pair, &lam, &tol()).unwrap();
            let diff = max_abs((form.expand() - oracle).iter().copied());
            assert!(diff <= 1e-12, "Λ={lam}: {diff:e}");
        }
    }
}
