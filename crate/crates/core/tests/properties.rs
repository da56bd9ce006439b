use dirac_core::criterion::{analyze_criterion, CriterionConfig};
use dirac_core::reduction::{
    beta_series, default_zero_threshold, solve_basic_equation, track_branch, BasicEqConfig, BRANCH_SAMPLES,
};
use dirac_core::spectral::bari_markus_profile;
use dirac_core::{
    compute_spectrum, make_trig_potential, make_xt_potential, t_ratio, Boundary, DiscretizationConfig,
    FourierPotential, Precision, Reducer, SchurReducer, SpectralRun,
};
use num_complex::Complex64;
use proptest::prelude::*;

const BCS: [Boundary; 2] = [Boundary::Periodic, Boundary::Antiperiodic];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small(modes: usize) -> DiscretizationConfig {
    DiscretizationConfig::new(modes).with_precision(Precision::Double)
}

fn coefficient(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| c(re, im))
}

fn trig(bound: f64) -> impl Strategy<Value = FourierPotential> {
    [coefficient(bound), coefficient(bound), coefficient(bound), coefficient(bound)]
        .prop_map(|[a, b, big_a, big_b]| make_trig_potential(a, b, big_a, big_b))
}

/// Coefficients at frequencies ±2, ±4, ±6.
fn banded(bound: f64) -> impl Strategy<Value = FourierPotential> {
    (prop::collection::vec(coefficient(bound), 6), prop::collection::vec(coefficient(bound), 6)).prop_map(|(p, q)| {
        let freqs = [-6, -4, -2, 2, 4, 6];
        FourierPotential::from_coefficients(freqs.into_iter().zip(p), freqs.into_iter().zip(q)).unwrap()
    })
}

fn sorted(mut zs: Vec<Complex64>) -> Vec<Complex64> {
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    zs
}

fn pair_values(run: &SpectralRun, n: i64) -> Vec<Complex64> {
    let p = run.pair(n).expect("localized pair");
    sorted(vec![p.lambda_minus, p.lambda_plus])
}

fn close_sets(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}

fn probe(dim: usize, seed: usize) -> Vec<Complex64> {
    (0..dim).map(|i| c(((i * 7 + seed * 3) % 11) as f64 - 5.0, ((i * 5 + seed) % 7) as f64 - 3.0)).collect()
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn free_operator_has_integer_double_eigenvalues() {
    for bc in BCS {
        for modes in [8, 11] {
            let run = compute_spectrum(&FourierPotential::zero(), bc, &small(modes)).unwrap();
            assert!(run.localization.issues.is_empty());
            for p in run.pairs() {
                assert_eq!(p.lambda_minus, c(p.n as f64, 0.0));
                assert_eq!(p.lambda_plus, c(p.n as f64, 0.0));
                assert_eq!(p.gap, 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adjoint_potential_conjugates_the_spectrum(v in trig(0.3)) {
        for bc in BCS {
            let cfg = small(10);
            let run = compute_spectrum(&v, bc, &cfg).unwrap();
            let adj = compute_spectrum(&v.adjoint(), bc, &cfg).unwrap();
            for p in run.pairs() {
                let conj: Vec<Complex64> = pair_values(&run, p.n).iter().map(|z| z.conj()).collect();
                prop_assert!(close_sets(&sorted(conj), &pair_values(&adj, p.n), 1e-9));
            }
        }
    }

    #[test]
    fn translating_the_potential_keeps_the_spectrum(v in banded(0.15), h in 0.0..std::f64::consts::PI) {
        let shift = |coeffs: &std::collections::BTreeMap<i64, Complex64>| {
            coeffs.iter().map(|(&m, &z)| (m, z * Complex64::from_polar(1.0, m as f64 * h))).collect::<Vec<_>>()
        };
        let moved = FourierPotential::from_coefficients(shift(v.p_coefficients()), shift(v.q_coefficients())).unwrap();
        for bc in BCS {
            let cfg = small(10);
            let a = compute_spectrum(&v, bc, &cfg).unwrap();
            let b = compute_spectrum(&moved, bc, &cfg).unwrap();
            let all = |r: &SpectralRun| sorted(r.eigenvalues.clone());
            prop_assert!(close_sets(&all(&a), &all(&b), 1e-9));
        }
    }

    #[test]
    fn symmetric_potentials_have_real_spectra(p in prop::collection::vec(coefficient(0.4), 4)) {
        let v = make_xt_potential([(-4, p[0]), (-2, p[1]), (2, p[2]), (4, p[3])], 1.0).unwrap();
        for bc in BCS {
            let run = compute_spectrum(&v, bc, &small(10)).unwrap();
            let worst = run.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            prop_assert!(worst <= 1e-9, "max |Im| = {worst}");
        }
    }

    #[test]
    fn pairs_follow_the_ordering_rule(v in trig(0.5)) {
        for bc in BCS {
            let run = compute_spectrum(&v, bc, &small(9)).unwrap();
            for p in run.pairs() {
                prop_assert!(p.is_ordered(), "pair {} split {}", p.n, p.split);
                prop_assert!(p.gap >= 0.0);
            }
        }
    }

    #[test]
    fn projections_are_idempotent_and_mutually_annihilating(v in trig(0.3)) {
        let run = compute_spectrum(&v, Boundary::Antiperiodic, &small(10)).unwrap();
        let dim = run.basis.dim();
        let ns: Vec<i64> = run.pairs().iter().map(|p| p.n).filter(|n| n.abs() >= 3).collect();
        let projections: Vec<_> = ns.iter().map(|&n| run.riesz_projection(n).unwrap()).collect();
        for (i, pn) in projections.iter().enumerate() {
            let x = probe(dim, i);
            let once = pn.apply(&x);
            let twice = pn.apply(&once);
            let diff: Vec<Complex64> = once.iter().zip(&twice).map(|(a, b)| a - b).collect();
            prop_assert!(max_abs(&diff) <= 1e-8 * (1.0 + max_abs(&once)));
            for pm in projections.iter().filter(|pm| pm.n != pn.n) {
                prop_assert!(max_abs(&pm.apply(&once)) <= 1e-8 * (1.0 + max_abs(&x)));
            }
        }
    }

    #[test]
    fn diagonal_of_the_reduced_problem_is_nearly_symmetric(v in banded(0.1)) {
        let bc = Boundary::Periodic;
        let reducer = SchurReducer::new(&v, bc, &small(16));
        for n in [-10, -8, 8, 10] {
            let ev = reducer.reduce(n, c(0.0, 0.0)).unwrap();
            prop_assert!(ev.diag_asym.unwrap() <= 0.05, "n = {n}: {:?}", ev.diag_asym);
        }
    }

    #[test]
    fn reduced_coefficients_start_with_the_potential(v in banded(0.05), n in prop::sample::select(vec![-3i64, -2, 2, 3])) {
        prop_assume!(v.norm_r() <= 0.2);
        prop_assume!(v.q(2 * n).norm() >= 0.02 && v.p(-2 * n).norm() >= 0.02);
        let bc = if n % 2 == 0 { Boundary::Periodic } else { Boundary::Antiperiodic };
        let ev = SchurReducer::new(&v, bc, &small(12)).reduce(n, c(0.0, 0.0)).unwrap();
        prop_assert!((ev.beta_plus - v.q(2 * n)).norm() <= 0.2 * v.q(2 * n).norm());
        prop_assert!((ev.beta_minus - v.p(-2 * n)).norm() <= 0.2 * v.p(-2 * n).norm());
    }

    #[test]
    fn xt_potentials_pair_the_two_coefficients(
        p in prop::collection::vec(coefficient(0.4), 4),
        t in prop::sample::select(vec![-2.0, -1.0, 0.5, 1.0, 3.0]),
        z in -0.3f64..0.3,
    ) {
        let v = make_xt_potential([(-4, p[0]), (-2, p[1]), (2, p[2]), (4, p[3])], t).unwrap();
        for (bc, n) in [(Boundary::Periodic, 6), (Boundary::Antiperiodic, -7)] {
            let ev = SchurReducer::new(&v, bc, &small(16)).reduce(n, c(z, 0.0)).unwrap();
            let scale = ev.beta_plus.norm().max(ev.beta_minus.norm()) + 1e-300;
            prop_assert!((ev.beta_plus - ev.beta_minus.conj() * t).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn trigonometric_potentials_have_empty_periodic_series(v in trig(1.0), k in 1i64..8, z in -0.4f64..0.4) {
        let n = 2 * k;
        let ev = beta_series(&v, n, c(z, 0.0), 6, 2 * n + 8).unwrap();
        prop_assert!(ev.series.unwrap().empty);
        prop_assert_eq!(ev.beta_plus, c(0.0, 0.0));
        prop_assert_eq!(ev.beta_minus, c(0.0, 0.0));
    }
}

#[test]
fn projection_deviations_are_stable_under_doubling_the_cutoff() {
    let v = make_trig_potential(c(0.5, 0.0), c(0.3, 0.1), c(0.2, -0.2), c(0.4, 0.0));
    let coarse = bari_markus_profile(&v, Boundary::Antiperiodic, &small(12).with_radius(6)).unwrap();
    let fine = bari_markus_profile(&v, Boundary::Antiperiodic, &small(24).with_radius(6)).unwrap();
    let mut compared = 0;
    for (a, b) in coarse.deviations.iter().zip(&fine.deviations) {
        assert_eq!(a.n, b.n);
        if a.enclosed != 2 || b.enclosed != 2 {
            continue;
        }
        compared += 1;
        assert!((a.deviation - b.deviation).abs() <= 1e-6, "n = {}: {} vs {}", a.n, a.deviation, b.deviation);
    }
    assert!(compared >= 4);
}

#[test]
fn bari_markus_partial_sums_grow_and_converge() {
    let v = make_trig_potential(c(0.5, 0.0), c(0.3, 0.1), c(0.2, -0.2), c(0.4, 0.0));
    let mut cfg = small(40);
    cfg.projection_halfwidth = Some(10);
    let sums: Vec<f64> = [5, 10, 20]
        .iter()
        .map(|&r| bari_markus_profile(&v, Boundary::Antiperiodic, &cfg.clone().with_radius(r)).unwrap().partial_sum)
        .collect();
    assert!(sums.windows(2).all(|w| w[1] >= w[0]));
    assert!(sums.iter().all(|s| s.is_finite()));
    assert!(sums[2] - sums[1] < sums[1] - sums[0]);
}

#[test]
fn basic_equation_roots_match_resolvable_eigenvalues() {
    let v = make_trig_potential(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
    let disc = DiscretizationConfig::new(24);
    let run = compute_spectrum(&v, Boundary::Antiperiodic, &disc).unwrap();
    let reducer = SchurReducer::new(&v, Boundary::Antiperiodic, &disc);
    let cfg = BasicEqConfig::for_potential(&v, disc.precision);
    for n in [7, 9, 11, -9] {
        let pair = run.pair(n).unwrap();
        assert!(pair.simple);
        let roots = solve_basic_equation(n, &reducer, &cfg).unwrap();
        let found = sorted(vec![roots.z1 + n as f64, roots.z2 + n as f64]);
        let expected = sorted(vec![pair.lambda_minus, pair.lambda_plus]);
        assert!(close_sets(&found, &expected, 1e-9 * (1.0 + pair.gap)), "n = {n}");
    }
}

#[test]
fn branch_is_continuous_with_small_phase_for_large_indices() {
    let v = make_trig_potential(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
    let disc = DiscretizationConfig::new(24);
    let reducer = SchurReducer::new(&v, Boundary::Antiperiodic, &disc);
    let cfg = BasicEqConfig::for_potential(&v, disc.precision);
    for n in [17, 19, -17] {
        let roots = solve_basic_equation(n, &reducer, &cfg).unwrap();
        let branch = track_branch(n, &reducer, roots.z1, roots.z2, BRANCH_SAMPLES).unwrap();
        assert!(branch.continuous, "n = {n}");
        assert!(branch.psi.unwrap().abs() <= 0.2, "n = {n}: psi {:?}", branch.psi);
    }
}

#[test]
fn xt_ratio_is_stable_across_the_disc() {
    let v = make_xt_potential([(2, c(1.0, 0.0)), (-2, c(0.5, 0.5))], 2.0).unwrap();
    let disc = DiscretizationConfig::new(32);
    let reducer = SchurReducer::new(&v, Boundary::Antiperiodic, &disc);
    let thr = default_zero_threshold(&v, disc.precision);
    for n in [13, -13, 15] {
        let centre = t_ratio(&reducer.reduce(n, c(0.0, 0.0)).unwrap(), thr).value();
        for z in [c(0.2, 0.0), c(-0.2, 0.0), c(0.0, 0.2)] {
            let moved = t_ratio(&reducer.reduce(n, z).unwrap(), thr).value();
            let q = moved / centre;
            assert!((0.5..=2.0).contains(&q), "n = {n}, z = {z}: {q}");
        }
    }
}

#[test]
fn criterion_reports_respect_bounds_and_are_deterministic() {
    let disc = DiscretizationConfig::new(42);
    let cfg = CriterionConfig::default();
    let balanced = make_trig_potential(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
    let first = analyze_criterion(&balanced, Boundary::Antiperiodic, &disc, &cfg).unwrap().report;
    let second = analyze_criterion(&balanced, Boundary::Antiperiodic, &disc, &cfg).unwrap().report;
    assert_eq!(first.to_json(), second.to_json());
    assert!(first.diagnostics.iter().all(|d| d.gap_upper_ok));
    assert!(first.ratio_max.is_finite());
    assert!(first.diagnostics.iter().all(|d| d.overlap_abs <= cfg.kappa));

    let unbalanced = make_trig_potential(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
    let report = analyze_criterion(&unbalanced, Boundary::Antiperiodic, &disc, &cfg).unwrap().report;
    assert!(report.diagnostics.iter().all(|d| d.gap_upper_ok));
    let tail: Vec<f64> = report.diagnostics.iter().filter(|d| d.n > 0).map(|d| d.overlap_abs).collect();
    let tail = &tail[tail.len() - 5..];
    assert!(tail.windows(2).all(|w| w[1] >= w[0] - 0.02), "{tail:?}");
    assert!(tail.iter().all(|&o| o > 0.9), "{tail:?}");
}
