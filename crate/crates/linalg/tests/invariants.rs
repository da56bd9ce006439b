use approx::assert_relative_eq;
use dirac_linalg::{
    cplx, eigen_decompose, solve_linear, solve_residual, BandedMatrix, ComplexMatrix, EigenConfig, Extended,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix_from(n: usize, vals: &[f64]) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(vals[k % vals.len()], vals[(k + 1) % vals.len()])
    })
}

/// Deterministic pseudo-random fill (SplitMix64) for the fixed-size oracles.
fn splitmix_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix<f64> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(next(), next()))
}

#[test]
fn random_50_residuals() {
    let m = splitmix_matrix(50, 50, 7);
    let e = eigen_decompose(&m, &EigenConfig::default()).unwrap();
    assert_eq!(e.len(), 50);
    let bound = 1e-10 * m.norm_fro();
    assert!(e.residuals.iter().all(|&r| r <= bound), "worst {:e}", e.worst_residual());
    for k in 0..50 {
        let v = e.eigenvector(k);
        assert_relative_eq!(dirac_linalg::vec_norm(&v), 1.0, epsilon = 1e-12);
    }
    for w in e.eigenvalues.windows(2) {
        assert!(w[0].re < w[1].re || (w[0].re == w[1].re && w[0].im <= w[1].im));
    }
}

#[test]
fn random_30_solve() {
    let mut m = splitmix_matrix(30, 30, 11);
    for i in 0..30 {
        m[(i, i)] += Complex64::new(8.0, 0.0);
    }
    let rhs = splitmix_matrix(30, 3, 12);
    let x = solve_linear(&m, &rhs).unwrap();
    let abs_res = m.matmul(&x).sub(&rhs).norm_fro();
    assert!(abs_res < 1e-11, "{abs_res:e}");
    assert!(solve_residual(&m, &x, &rhs) < 1e-14);
}

#[test]
fn extended_precision_residuals() {
    let m: ComplexMatrix<Extended> = splitmix_matrix(24, 24, 3).map_precision();
    let e = eigen_decompose(&m, &EigenConfig::with_tolerance(1e-28)).unwrap();
    assert!(e.worst_residual() < 1e-28 * e.matrix_norm);
}

#[test]
fn band_and_dense_spectra_agree() {
    let n = 40;
    let mut b = BandedMatrix::<f64>::zeros(n, 3, 3);
    for i in 0..n {
        b.set(i, i, cplx(i as f64 - 20.0, 0.0));
        for d in 1..=3 {
            if i + d < n {
                b.set(i, i + d, cplx(0.3 / d as f64, 0.1));
                b.set(i + d, i, cplx(0.2, -0.05 * d as f64));
            }
        }
    }
    let dense = b.to_dense();
    let e = eigen_decompose(&dense, &EigenConfig::default()).unwrap();
    let tr: Complex64 = e.eigenvalues.iter().sum();
    assert!((tr - dense.trace()).norm() < 1e-9 * dense.norm_fro());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalue_sum_is_trace(n in 1usize..40, vals in prop::collection::vec(-3.0f64..3.0, 16..64)) {
        let m = matrix_from(n, &vals);
        let e = eigen_decompose(&m, &EigenConfig::default()).unwrap();
        prop_assert_eq!(e.len(), n);
        let s: Complex64 = e.eigenvalues.iter().sum();
        prop_assert!((s - m.trace()).norm() <= 1e-9 * m.norm_fro().max(1.0));
        prop_assert!(e.residuals.iter().all(|&r| r <= 1e-10 * m.norm_fro().max(f64::MIN_POSITIVE)));
    }

    #[test]
    fn hermitian_spectrum_is_real(n in 1usize..40, vals in prop::collection::vec(-3.0f64..3.0, 16..64)) {
        let a = matrix_from(n, &vals);
        let h = a.add(&a.adjoint());
        let e = eigen_decompose(&h, &EigenConfig::default()).unwrap();
        let bound = 1e-10 * h.norm_fro().max(1.0);
        prop_assert!(e.eigenvalues.iter().all(|l| l.im.abs() <= bound));
    }

    #[test]
    fn band_solve_inverts_product(n in 2usize..60, kl in 0usize..4, ku in 0usize..4,
                                  vals in prop::collection::vec(-1.0f64..1.0, 8..32)) {
        let mut b = BandedMatrix::<f64>::zeros(n, kl, ku);
        let mut k = 0;
        for i in 0..n {
            for j in b.row_span(i) {
                let v = if i == j { cplx(4.0 + vals[k % vals.len()], 0.5) } else { cplx(vals[k % vals.len()], vals[(k + 3) % vals.len()]) };
                b.set(i, j, v);
                k += 1;
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| cplx(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let rhs = b.mul_vec(&x);
        let lu = b.clone().factor().unwrap();
        let y = lu.solve(&rhs);
        let err = x.iter().zip(&y).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-11);
        let rhs_h = b.to_dense().adjoint().mul_vec(&x);
        let yh = lu.solve_adjoint(&rhs_h);
        let err_h = x.iter().zip(&yh).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        prop_assert!(err_h < 1e-11);
    }
}
