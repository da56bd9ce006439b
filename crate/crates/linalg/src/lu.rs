use num_complex::Complex;

use crate::error::LinalgError;
use crate::matrix::ComplexMatrix;
use crate::scalar::{abs, cdiv, czero, Real};

/// LU factors with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactors<T: Real> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
}

/// Pivots at or below `n · u · max|a_ij|` count as zero.
pub fn lu_factor<T: Real>(m: &ComplexMatrix<T>) -> Result<LuFactors<T>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let floor = T::of(n as f64 * T::UNIT_ROUNDOFF) * m.max_abs();
    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, abs(lu[(i, k)])))
            .fold((k, T::neg_infinity()), |best, c| if c.1 > best.1 { c } else { best });
        if pmag <= floor || pmag == T::zero() {
            return Err(LinalgError::Singular { pivot: pmag.as_f64(), step: k });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = cdiv(lu[(i, k)], pivot);
            lu[(i, k)] = l;
            if l.re == T::zero() && l.im == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - l * u;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl<T: Real> LuFactors<T> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = (0..i).fold(czero(), |acc, j| acc + self.lu[(i, j)] * x[j]);
            x[i] = x[i] - s;
        }
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(czero(), |acc, j| acc + self.lu[(i, j)] * x[j]);
            x[i] = cdiv(x[i] - s, self.lu[(i, i)]);
        }
        x
    }

    pub fn solve(&self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(rhs.rows(), self.dim());
        let cols: Vec<_> = (0..rhs.cols()).map(|j| self.solve_vec(&rhs.column(j))).collect();
        ComplexMatrix::from_columns(&cols)
    }

    /// Product of the pivots with the permutation sign.
    pub fn determinant(&self) -> Complex<T> {
        let mut d = Complex::new(T::one(), T::zero());
        for i in 0..self.dim() {
            d = d * self.lu[(i, i)];
        }
        let mut seen = vec![false; self.dim()];
        let mut odd = false;
        for start in 0..self.dim() {
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len > 0 && len % 2 == 0 {
                odd = !odd;
            }
        }
        if odd {
            -d
        } else {
            d
        }
    }
}

/// Solves `m X = rhs`.
pub fn solve_linear<T: Real>(
    m: &ComplexMatrix<T>,
    rhs: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>, LinalgError> {
    if rhs.rows() != m.rows() {
        return Err(LinalgError::DimensionMismatch { expected: m.rows(), found: rhs.rows() });
    }
    Ok(lu_factor(m)?.solve(rhs))
}

/// `‖m X − rhs‖_F / (‖m‖_F ‖X‖_F)`, the normwise backward error.
pub fn solve_residual<T: Real>(m: &ComplexMatrix<T>, x: &ComplexMatrix<T>, rhs: &ComplexMatrix<T>) -> f64 {
    let r = m.matmul(x).sub(rhs).norm_fro().as_f64();
    let scale = (m.norm_fro() * x.norm_fro()).as_f64();
    if scale == 0.0 {
        r
    } else {
        r / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn identity_returns_rhs() {
        let rhs = ComplexMatrix::<f64>::from_fn(3, 2, |i, j| cplx(i as f64, -(j as f64)));
        let x = solve_linear(&ComplexMatrix::identity(3), &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn diagonal_system() {
        let m = ComplexMatrix::<f64>::from_diagonal(&[cplx(2.0, 0.0), cplx(4.0, 0.0)]);
        let rhs = ComplexMatrix::from_columns(&[vec![cplx(2.0, 0.0), cplx(4.0, 0.0)]]);
        let x = solve_linear(&m, &rhs).unwrap();
        assert_eq!(x.column(0), vec![cplx(1.0, 0.0), cplx(1.0, 0.0)]);
    }

    #[test]
    fn singular_reports_pivot() {
        let m = ComplexMatrix::<f64>::from_rows(&[
            vec![cplx(1.0, 0.0), cplx(2.0, 0.0)],
            vec![cplx(2.0, 0.0), cplx(4.0, 0.0)],
        ]);
        let rhs = ComplexMatrix::identity(2);
        assert!(matches!(solve_linear(&m, &rhs), Err(LinalgError::Singular { step: 1, .. })));
    }

    #[test]
    fn determinant_with_swap() {
        let m = ComplexMatrix::<f64>::from_rows(&[
            vec![cplx(0.0, 0.0), cplx(1.0, 0.0)],
            vec![cplx(1.0, 0.0), cplx(0.0, 0.0)],
        ]);
        assert_eq!(lu_factor(&m).unwrap().determinant(), cplx(-1.0, 0.0));
    }
}
