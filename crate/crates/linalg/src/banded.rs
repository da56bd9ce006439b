use num_complex::Complex;

use crate::error::LinalgError;
use crate::matrix::ComplexMatrix;
use crate::scalar::{abs, cdiv, czero, Real};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores columns `i - kl ..= i + ku + kl`; the extra `kl` slots hold
/// fill-in produced by row pivoting during factorization.
#[derive(Clone, Debug)]
pub struct BandedMatrix<T: Real = f64> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n >= 1, "band matrix dimension must be positive");
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![czero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            czero()
        }
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Columns of row `i` that can hold nonzeros.
    pub fn row_span(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.row_span(i) {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| self.row_span(i).fold(czero(), |acc, j| acc + self.get(i, j) * x[j]))
            .collect()
    }

    pub fn shift_diagonal(&mut self, s: Complex<T>) {
        for i in 0..self.n {
            let k = self.slot(i, i);
            self.data[k] = self.data[k] - s;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(abs(x)))
    }

    /// Partial-pivoting LU, consuming the matrix.
    pub fn factor(mut self) -> Result<BandedLu<T>, LinalgError> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let floor = T::of(n as f64 * T::UNIT_ROUNDOFF) * self.max_abs();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = abs(self.data[self.slot(k, k)]);
            for i in k + 1..=last_row {
                let m = abs(self.data[self.slot(i, k)]);
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= floor || best == T::zero() {
                return Err(LinalgError::Singular { pivot: best.as_f64(), step: k });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let si = self.slot(i, k);
                let l = cdiv(self.data[si], pivot);
                self.data[si] = l;
                if l.re == T::zero() && l.im == T::zero() {
                    continue;
                }
                for j in k + 1..=last_col {
                    let u = self.data[self.slot(k, j)];
                    let s = self.slot(i, j);
                    self.data[s] = self.data[s] - l * u;
                }
            }
        }
        Ok(BandedLu { f: self, piv })
    }
}

/// Factors of a band matrix; the upper factor has bandwidth `kl + ku`.
#[derive(Clone, Debug)]
pub struct BandedLu<T: Real> {
    f: BandedMatrix<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn dim(&self) -> usize {
        self.f.n
    }

    fn u_reach(&self, i: usize) -> usize {
        (i + self.f.kl + self.f.ku + 1).min(self.f.n)
    }

    fn l_reach(&self, k: usize) -> usize {
        (k + self.f.kl + 1).min(self.f.n)
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let a = &self.f;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in k + 1..self.l_reach(k) {
                x[i] = x[i] - a.data[a.slot(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..self.u_reach(i) {
                s = s - a.data[a.slot(i, j)] * x[j];
            }
            x[i] = cdiv(s, a.data[a.slot(i, i)]);
        }
        x
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let a = &self.f;
        let reach = a.kl + a.ku;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in i.saturating_sub(reach)..i {
                s = s - a.data[a.slot(j, i)].conj() * y[j];
            }
            y[i] = cdiv(s, a.data[a.slot(i, i)].conj());
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for i in k + 1..self.l_reach(k) {
                s = s - a.data[a.slot(i, k)].conj() * y[i];
            }
            y[k] = s;
            y.swap(k, self.piv[k]);
        }
        y
    }

    /// Argument of the determinant in `(-π, π]`.
    pub fn determinant_arg(&self) -> f64 {
        let mut phase = 0.0f64;
        for k in 0..self.dim() {
            let d = self.f.data[self.f.slot(k, k)];
            phase += d.im.as_f64().atan2(d.re.as_f64());
            if self.piv[k] != k {
                phase += std::f64::consts::PI;
            }
        }
        let two_pi = std::f64::consts::TAU;
        let r = phase.rem_euclid(two_pi);
        if r > std::f64::consts::PI {
            r - two_pi
        } else {
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu::lu_factor;
    use crate::scalar::cplx;

    fn tridiag(n: usize) -> BandedMatrix<f64> {
        let mut b = BandedMatrix::zeros(n, 1, 2);
        for i in 0..n {
            b.set(i, i, cplx(0.1 * i as f64, 0.3));
            if i + 1 < n {
                b.set(i, i + 1, cplx(1.0, -0.5));
                b.set(i + 1, i, cplx(2.0, 0.25));
            }
            if i + 2 < n {
                b.set(i, i + 2, cplx(-0.7, 0.0));
            }
        }
        b
    }

    #[test]
    fn solve_matches_dense() {
        let b = tridiag(9);
        let rhs: Vec<_> = (0..9).map(|i| cplx(1.0, i as f64)).collect();
        let x = b.clone().factor().unwrap().solve(&rhs);
        let r = b.mul_vec(&x);
        for (u, v) in r.iter().zip(&rhs) {
            assert!((u - v).norm() < 1e-12);
        }
        let dense = b.to_dense();
        let xd = lu_factor(&dense).unwrap().solve_vec(&rhs);
        for (u, v) in x.iter().zip(&xd) {
            assert!((u - v).norm() < 1e-11);
        }
    }

    #[test]
    fn adjoint_solve() {
        let b = tridiag(8);
        let rhs: Vec<_> = (0..8).map(|i| cplx(i as f64 - 3.0, 0.5)).collect();
        let y = b.clone().factor().unwrap().solve_adjoint(&rhs);
        let r = b.to_dense().adjoint().mul_vec(&y);
        for (u, v) in r.iter().zip(&rhs) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_phase_matches_dense() {
        let b = tridiag(7);
        let d = lu_factor(&b.to_dense()).unwrap().determinant();
        let arg = b.factor().unwrap().determinant_arg();
        let diff = (arg - d.arg()).rem_euclid(std::f64::consts::TAU);
        assert!(diff < 1e-10 || std::f64::consts::TAU - diff < 1e-10);
    }
}
