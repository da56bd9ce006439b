use std::cmp::Ordering;

use num_complex::Complex;

use crate::error::LinalgError;
use crate::matrix::{dot, vec_norm, ComplexMatrix};
use crate::scalar::{abs, abs2, cdiv, cscale_inv, csqrt, czero, Real};

/// Limits applied by [`eigen_decompose`].
#[derive(Clone, Copy, Debug)]
pub struct EigenConfig {
    /// Residual bound relative to the Frobenius norm of the input.
    pub tolerance: f64,
    pub max_dim: usize,
    /// QR sweeps allowed per eigenvalue on average.
    pub sweeps_per_eigenvalue: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_dim: 2048, sweeps_per_eigenvalue: 30 }
    }
}

impl EigenConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance, ..Self::default() }
    }
}

/// Complex Schur form `A = Z T Z^H` with `T` upper triangular and `Z` unitary.
#[derive(Clone, Debug)]
pub struct SchurForm<T: Real> {
    pub t: ComplexMatrix<T>,
    pub z: ComplexMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct EigenResult<T: Real = f64> {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex<T>>,
    /// Unit-norm eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix<T>,
    /// `‖A v − λ v‖` per pair.
    pub residuals: Vec<f64>,
    /// Set when the vector is numerically collinear with that of a coincident eigenvalue.
    pub defective: Vec<bool>,
    pub matrix_norm: f64,
    pub schur: SchurForm<T>,
}

impl<T: Real> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }

    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Reduces `a` to upper Hessenberg form in place and accumulates the
/// Householder reflectors into `q`, so that `A_in = Q H Q^H`.
fn hessenberg<T: Real>(a: &mut ComplexMatrix<T>, q: &mut ComplexMatrix<T>) {
    let n = a.rows();
    let two = T::of(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == T::zero() {
            continue;
        }
        let x0 = x[0];
        let m0 = abs(x0);
        let phase = if m0 == T::zero() { Complex::new(T::one(), T::zero()) } else { cscale_inv(x0, m0) };
        let alpha = -phase * Complex::new(xnorm, T::zero());
        let mut v = x;
        v[0] = v[0] - alpha;
        let vn2 = v.iter().fold(T::zero(), |s, &c| s + abs2(c));
        if vn2 == T::zero() {
            continue;
        }
        let tau = two.quot(vn2);
        for j in k..n {
            let s = v.iter().enumerate().fold(czero(), |acc, (i, &vi)| acc + vi.conj() * a[(k + 1 + i, j)]);
            let s = s * tau;
            for (i, &vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] = a[(k + 1 + i, j)] - vi * s;
            }
        }
        for mat in [&mut *a, &mut *q] {
            for i in 0..n {
                let s = v.iter().enumerate().fold(czero(), |acc, (j, &vj)| acc + mat[(i, k + 1 + j)] * vj);
                let s = s * tau;
                for (j, &vj) in v.iter().enumerate() {
                    mat[(i, k + 1 + j)] = mat[(i, k + 1 + j)] - s * vj.conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = czero();
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G (x, y)^T = (r, 0)^T`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ay = abs(y);
    if ay == T::zero() {
        return (T::one(), czero());
    }
    let ax = abs(x);
    if ax == T::zero() {
        return (T::zero(), cscale_inv(y.conj(), ay));
    }
    let r = (ax * ax + ay * ay).sqrt();
    let c = ax.quot(r);
    let s = cscale_inv(cscale_inv(x, ax) * y.conj(), r);
    (c, s)
}

/// Eigenvalue of the trailing 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::of(0.5);
    let h = (a - d) * half;
    let disc = csqrt(h * h + b * c);
    let mean = (a + d) * half;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if abs(l1 - d) < abs(l2 - d) {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition by Hessenberg reduction and single-shift QR.
pub fn schur_decompose<T: Real>(m: &ComplexMatrix<T>, cfg: &EigenConfig) -> Result<SchurForm<T>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() > cfg.max_dim {
        return Err(LinalgError::TooLarge { dim: m.rows(), max: cfg.max_dim });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows();
    let mut h = m.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut z);
    let eps = T::of(T::UNIT_ROUNDOFF);
    let norm = h.norm_fro().max(T::min_positive_value());
    let budget = cfg.sweeps_per_eigenvalue.max(1) * n.max(1);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = abs(h[(l, l - 1)]);
            let mut scale = abs(h[(l - 1, l - 1)]) + abs(h[(l, l)]);
            if scale == T::zero() {
                scale = norm;
            }
            if sub <= eps * scale || sub <= T::min_positive_value() {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > budget {
            let worst = (1..n).map(|i| abs(h[(i, i - 1)]).as_f64()).fold(0.0, f64::max);
            return Err(LinalgError::NoConvergence { worst_residual: worst });
        }
        let mu = if its % 11 == 10 {
            h[(hi, hi)] + Complex::new(abs(h[(hi, hi - 1)]) * T::of(1.5), T::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..hi {
            let (x, y) = if k == l { (h[(l, l)] - mu, h[(l + 1, l)]) } else { (h[(k, k - 1)], h[(k + 1, k - 1)]) };
            let (c, s) = givens(x, y);
            let cc = Complex::new(c, T::zero());
            let start = if k == l { l } else { k - 1 };
            for j in start..n {
                let t1 = h[(k, j)];
                let t2 = h[(k + 1, j)];
                h[(k, j)] = cc * t1 + s * t2;
                h[(k + 1, j)] = cc * t2 - s.conj() * t1;
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let t1 = h[(i, k)];
                let t2 = h[(i, k + 1)];
                h[(i, k)] = cc * t1 + s.conj() * t2;
                h[(i, k + 1)] = cc * t2 - s * t1;
            }
            for i in 0..n {
                let t1 = z[(i, k)];
                let t2 = z[(i, k + 1)];
                z[(i, k)] = cc * t1 + s.conj() * t2;
                z[(i, k + 1)] = cc * t2 - s * t1;
            }
            if k > l {
                h[(k + 1, k - 1)] = czero();
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = czero();
        }
    }
    Ok(SchurForm { t: h, z })
}

/// Eigenvectors of the triangular factor, mapped back through `Z`.
fn schur_eigenvectors<T: Real>(s: &SchurForm<T>) -> Vec<Vec<Complex<T>>> {
    let n = s.t.rows();
    let t = &s.t;
    let smin = (T::of(T::UNIT_ROUNDOFF) * t.norm_fro()).max(T::min_positive_value());
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut x = vec![czero::<T>(); n];
            x[k] = Complex::new(T::one(), T::zero());
            for j in (0..k).rev() {
                let mut acc: Complex<T> = czero();
                for m in j + 1..=k {
                    acc = acc + t[(j, m)] * x[m];
                }
                let mut d = t[(j, j)] - lambda;
                if abs(d) < smin {
                    d = Complex::new(smin, T::zero());
                }
                x[j] = -cdiv(acc, d);
            }
            let v = s.z.mul_vec(&x);
            let nv = vec_norm(&v);
            v.into_iter().map(|c| cscale_inv(c, nv)).collect()
        })
        .collect()
}

fn cmp_complex<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Full eigendecomposition of a general complex matrix.
pub fn eigen_decompose<T: Real>(m: &ComplexMatrix<T>, cfg: &EigenConfig) -> Result<EigenResult<T>, LinalgError> {
    let schur = schur_decompose(m, cfg)?;
    let n = m.rows();
    let values = schur.t.diagonal();
    let vectors = schur_eigenvectors(&schur);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_complex(&values[i], &values[j]));
    let eigenvalues: Vec<_> = order.iter().map(|&i| values[i]).collect();
    let cols: Vec<_> = order.iter().map(|&i| vectors[i].clone()).collect();
    let norm = m.norm_fro();
    let residuals: Vec<f64> = eigenvalues
        .iter()
        .zip(&cols)
        .map(|(&l, v)| {
            let av = m.mul_vec(v);
            let r: Vec<_> = av.iter().zip(v).map(|(&a, &x)| a - l * x).collect();
            vec_norm(&r).as_f64()
        })
        .collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= cfg.tolerance * norm.as_f64().max(f64::MIN_POSITIVE)) {
        return Err(LinalgError::NoConvergence { worst_residual: worst });
    }
    let cluster = T::of(T::UNIT_ROUNDOFF.sqrt() * 1e2) * norm.max(T::one());
    let collinear = T::one() - T::of(T::UNIT_ROUNDOFF.sqrt() * 1e2);
    let mut defective = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            if (eigenvalues[j].re - eigenvalues[i].re) > cluster {
                break;
            }
            if abs(eigenvalues[j] - eigenvalues[i]) <= cluster && abs(dot(&cols[i], &cols[j])) >= collinear {
                defective[i] = true;
                defective[j] = true;
            }
        }
    }
    Ok(EigenResult {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_columns(&cols),
        residuals,
        defective,
        matrix_norm: norm.as_f64(),
        schur,
    })
}

/// Largest singular value, from the Hermitian matrix `A^H A`.
pub fn spectral_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<f64, LinalgError> {
    let g = m.adjoint().matmul(m);
    let s = schur_decompose(&g, &EigenConfig::default())?;
    let top = s.t.diagonal().iter().map(|d| d.re.as_f64()).fold(0.0, f64::max);
    Ok(top.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use crate::Extended;

    #[test]
    fn diagonal_matrix() {
        let m = ComplexMatrix::<f64>::from_diagonal(&[cplx(1.0, 0.0), cplx(0.0, 2.0)]);
        let e = eigen_decompose(&m, &EigenConfig::default()).unwrap();
        assert_eq!(e.eigenvalues, vec![cplx(0.0, 2.0), cplx(1.0, 0.0)]);
        assert!(e.residuals.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn nilpotent_block_is_flagged() {
        let m = ComplexMatrix::<f64>::from_rows(&[vec![cplx(0.0, 0.0), cplx(1.0, 0.0)], vec![cplx(0.0, 0.0), cplx(0.0, 0.0)]]);
        let e = eigen_decompose(&m, &EigenConfig::default()).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.eigenvalues.iter().all(|l| l.norm() < 1e-12));
        assert_eq!(e.defective, vec![true, true]);
    }

    #[test]
    fn companion_roots_in_extended_precision() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = ComplexMatrix::<Extended>::from_rows(&[
            vec![cplx(6.0, 0.0), cplx(-11.0, 0.0), cplx(6.0, 0.0)],
            vec![cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)],
            vec![cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)],
        ]);
        let e = eigen_decompose(&m, &EigenConfig::with_tolerance(1e-28)).unwrap();
        for (k, l) in e.eigenvalues.iter().enumerate() {
            let err = (*l - cplx::<Extended>(k as f64 + 1.0, 0.0)).norm().as_f64();
            assert!(err < 1e-27, "root {k}: {err:e}");
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = ComplexMatrix::<f64>::from_diagonal(&[cplx(3.0, 4.0), cplx(1.0, 0.0)]);
        assert!((spectral_norm(&m).unwrap() - 5.0).abs() < 1e-12);
    }
}
