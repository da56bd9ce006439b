use std::fmt::{Debug, Display};

use num_complex::{Complex, Complex64};
use num_traits::{Float, FromPrimitive};
use twofloat::TwoFloat;

/// Double-double real type used for the extended working precision.
pub type Extended = TwoFloat;

/// Real field the kernels are generic over.
///
/// `num_traits::Float::epsilon` is not meaningful for every implementor, so the
/// unit roundoff is provided here explicitly.
pub trait Real: Float + FromPrimitive + Send + Sync + Debug + Display + Default + 'static {
    /// Unit roundoff of the arithmetic.
    const UNIT_ROUNDOFF: f64;

    /// Exact widening conversion. (`FromPrimitive::from_f64` is not exact for
    /// every implementor.)
    fn of(x: f64) -> Self;

    /// Correctly rounded quotient. Use this rather than `/`: the double-double
    /// operator is only accurate to about one word.
    fn quot(self, rhs: Self) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON;

    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn quot(self, rhs: Self) -> Self {
        self / rhs
    }
}

impl Real for TwoFloat {
    // 2^-104
    const UNIT_ROUNDOFF: f64 = 4.930380657631324e-32;

    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }

    #[inline]
    fn quot(self, rhs: Self) -> Self {
        let q = self / rhs;
        if !q.is_finite() || rhs.hi() == 0.0 {
            return q;
        }
        let r = self - q * rhs;
        q + TwoFloat::from(r.hi() / rhs.hi())
    }
}

pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

pub fn lift<T: Real>(z: Complex64) -> Complex<T> {
    Complex::new(T::of(z.re), T::of(z.im))
}

pub fn lower<T: Real>(z: Complex<T>) -> Complex64 {
    Complex64::new(z.re.as_f64(), z.im.as_f64())
}

pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub fn cdiv<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let (br, bi) = (b.re.abs(), b.im.abs());
    if br >= bi {
        let r = b.im.quot(b.re);
        let d = b.re + b.im * r;
        Complex::new((a.re + a.im * r).quot(d), (a.im - a.re * r).quot(d))
    } else {
        let r = b.re.quot(b.im);
        let d = b.re * r + b.im;
        Complex::new((a.re * r + a.im).quot(d), (a.im * r - a.re).quot(d))
    }
}

pub fn cscale_inv<T: Real>(a: Complex<T>, s: T) -> Complex<T> {
    Complex::new(a.re.quot(s), a.im.quot(s))
}

/// Principal square root computed with the corrected quotient.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = abs(z);
    if m == T::zero() {
        return czero();
    }
    let half = T::of(0.5);
    let a = ((m + z.re.abs()) * half).sqrt();
    let b = (z.im.abs() * half).quot(a);
    if z.re >= T::zero() {
        Complex::new(a, if z.im < T::zero() { -b } else { b })
    } else {
        Complex::new(b, if z.im < T::zero() { -a } else { a })
    }
}

/// Modulus that avoids the `hypot` path, which is slow for double-double.
pub fn abs<T: Real>(z: Complex<T>) -> T {
    let a = z.re.abs();
    let b = z.im.abs();
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == T::zero() {
        return T::zero();
    }
    let r = small.quot(big);
    big * (T::one() + r * r).sqrt()
}

pub fn abs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_roundoff_is_resolved() {
        let one = Extended::of(1.0);
        let tiny = Extended::of(Extended::UNIT_ROUNDOFF * 8.0);
        assert!((one + tiny) - one > Extended::of(0.0));
        assert_eq!(Extended::of(0.5).as_f64(), 0.5);
    }

    #[test]
    fn corrected_quotient() {
        let q = Extended::of(1.0).quot(Extended::of(3.0));
        let e = q * Extended::of(3.0) - Extended::of(1.0);
        assert!(e.abs().as_f64() < 1e-31);
        let z = cdiv(cplx::<Extended>(1.0, 2.0), cplx(3.0, -1.0));
        let back = z * cplx(3.0, -1.0) - cplx(1.0, 2.0);
        assert!(abs(back).as_f64() < 1e-30);
        let s = csqrt(cplx::<Extended>(-3.0, 4.0));
        assert!(abs(s - cplx(1.0, 2.0)).as_f64() < 1e-30);
        assert_eq!(csqrt(cplx::<f64>(-4.0, 0.0)), cplx(0.0, 2.0));
    }

    #[test]
    fn modulus_matches_norm() {
        let z = cplx::<f64>(3.0, -4.0);
        assert_eq!(abs(z), 5.0);
        assert_eq!(abs(czero::<f64>()), 0.0);
        let w = cplx::<Extended>(1e-20, 1.0);
        assert!((abs(w).as_f64() - 1.0).abs() < 1e-15);
    }
}
