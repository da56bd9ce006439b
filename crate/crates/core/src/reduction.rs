//! Reduction of the eigenvalue problem near `n` to a 2×2 matrix
//! `[[α − z, β⁻], [β⁺, α − z]]`, by series or by Schur complement, and the
//! scalar equations for the two eigenvalues in the disc around `n`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use dirac_linalg::{abs, lift, lower, lu_factor, BandedMatrix, ComplexMatrix, Extended, Real};
use num_complex::{Complex, Complex64};
use serde::{Serialize, Serializer};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::basis::{Basis, Boundary, DiscretizationConfig, Precision};
use crate::potential::FourierPotential;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("fixed-point iteration for index {n} is not contracting")]
    NonContraction { n: i64 },
    #[error("index {n}: n + z = {n} + {z} is too close to an eigenvalue of the complementary block")]
    ForeignEigenvalue { n: i64, z: Complex64 },
    #[error("index {n} is not represented in the truncated basis")]
    OutsideBasis { n: i64 },
    #[error("{0}")]
    BadInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Series,
    Schur,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Series => "series",
            Route::Schur => "schur",
        })
    }
}

/// Bookkeeping for a truncated series evaluation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SeriesMeta {
    /// Index paths with a nonzero coefficient product, per sign.
    pub paths_plus: f64,
    pub paths_minus: f64,
    /// Lowest order contributing a nonzero term, per sign.
    pub lowest_order_plus: Option<usize>,
    pub lowest_order_minus: Option<usize>,
    /// Some path left `|j| <= J` and was dropped.
    pub clipped: bool,
    /// No admissible path contributed at all.
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedEval {
    pub n: i64,
    pub z: Complex64,
    /// Only the Schur route supplies `α`.
    pub alpha: Option<Complex64>,
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
    pub route: Route,
    pub nu_max: Option<usize>,
    #[serde(rename = "J")]
    pub index_radius: Option<i64>,
    /// `|M₁₁ − M₂₂|` of the Schur complement.
    pub diag_asym: Option<f64>,
    #[serde(skip)]
    pub series: Option<SeriesMeta>,
}

impl ReducedEval {
    pub fn eta(&self) -> Option<Complex64> {
        if self.beta_plus.norm() == 0.0 {
            None
        } else {
            Some(self.beta_minus / self.beta_plus)
        }
    }

    fn alpha_or_err(&self) -> Result<Complex64, ReductionError> {
        self.alpha.ok_or_else(|| ReductionError::BadInput("the series route does not provide alpha".into()))
    }
}

/// Nonnegative real or `+∞`; serializes infinity as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(x) if x.is_finite())
    }

    /// `max(t, 1/t)`, infinite for `t ∈ {0, ∞}`.
    pub fn spread(self) -> f64 {
        let t = self.value();
        if t == 0.0 || t.is_infinite() {
            f64::INFINITY
        } else {
            t.max(1.0 / t)
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        if x.is_infinite() {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x:.6e}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) if x.is_finite() => s.serialize_f64(*x),
            _ => s.serialize_str("inf"),
        }
    }
}

/// `|β⁻/β⁺|`, with `∞` when only `β⁺` vanishes and `1` when both do.
pub fn t_ratio(eval: &ReducedEval, zero_threshold: f64) -> ExtReal {
    let (bp, bm) = (eval.beta_plus.norm(), eval.beta_minus.norm());
    if bp > zero_threshold {
        ExtReal::Finite(bm / bp)
    } else if bm > zero_threshold {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(1.0)
    }
}

/// Threshold below which a reduced coefficient counts as zero, scaled to the
/// working precision and the size of the potential.
pub fn default_zero_threshold(v: &FourierPotential, precision: Precision) -> f64 {
    1e3 * precision.unit_roundoff() * (1.0 + v.norm_r())
}

#[derive(Clone, Copy)]
enum Factor {
    P,
    Q,
}

struct Walk {
    sum: Complex64,
    paths: f64,
    lowest: Option<usize>,
    clipped: bool,
}

/// Sums all index paths of the series for one sign, merging paths by their
/// current index.
fn walk(v: &FourierPotential, n: i64, z: Complex64, nu_max: usize, j_max: i64, first: Factor) -> Walk {
    let second = match first {
        Factor::P => Factor::Q,
        Factor::Q => Factor::P,
    };
    let close = |j: i64| match first {
        Factor::Q => v.q(j + n),
        Factor::P => v.p(-j - n),
    };
    let mut out = Walk { sum: Complex64::new(0.0, 0.0), paths: 0.0, lowest: None, clipped: false };
    let mut states: BTreeMap<i64, (Complex64, f64)> = BTreeMap::from([(n, (Complex64::new(1.0, 0.0), 1.0))]);
    for nu in 0..=nu_max {
        for (&j, &(amp, count)) in &states {
            let c = close(j);
            if c.norm() != 0.0 {
                out.sum += amp * c;
                out.paths += count;
                out.lowest.get_or_insert(nu);
            }
        }
        if nu == nu_max {
            break;
        }
        for factor in [first, second] {
            let mut next: BTreeMap<i64, (Complex64, f64)> = BTreeMap::new();
            let coeffs = match factor {
                Factor::P => v.p_coefficients(),
                Factor::Q => v.q_coefficients(),
            };
            for (&j, &(amp, count)) in &states {
                for (&m, &c) in coeffs {
                    let to = match factor {
                        Factor::Q => m - j,
                        Factor::P => -m - j,
                    };
                    if to == n {
                        continue;
                    }
                    if to.abs() > j_max {
                        out.clipped = true;
                        continue;
                    }
                    let e = next.entry(to).or_insert((Complex64::new(0.0, 0.0), 0.0));
                    e.0 += amp * c / ((n - to) as f64 + z);
                    e.1 += count;
                }
            }
            states = next;
        }
        if states.is_empty() {
            break;
        }
    }
    out
}

/// `β⁺` and `β⁻` from the series truncated at order `nu_max` and index radius `j_max`.
pub fn beta_series(
    v: &FourierPotential,
    n: i64,
    z: Complex64,
    nu_max: usize,
    j_max: i64,
) -> Result<ReducedEval, ReductionError> {
    if n.abs() < 2 {
        return Err(ReductionError::BadInput(format!("series needs |n| >= 2, got {n}")));
    }
    if !(z.norm() <= 0.5) {
        return Err(ReductionError::BadInput(format!("series needs |z| <= 1/2, got {z}")));
    }
    if j_max < n.abs() + 2 {
        return Err(ReductionError::BadInput(format!("index radius {j_max} must be at least |n| + 2")));
    }
    let plus = walk(v, n, z, nu_max, j_max, Factor::Q);
    let minus = walk(v, n, z, nu_max, j_max, Factor::P);
    let meta = SeriesMeta {
        paths_plus: plus.paths,
        paths_minus: minus.paths,
        lowest_order_plus: plus.lowest,
        lowest_order_minus: minus.lowest,
        clipped: plus.clipped || minus.clipped,
        empty: plus.lowest.is_none() && minus.lowest.is_none(),
    };
    Ok(ReducedEval {
        n,
        z,
        alpha: None,
        beta_plus: plus.sum,
        beta_minus: minus.sum,
        route: Route::Series,
        nu_max: Some(nu_max),
        index_radius: Some(j_max),
        diag_asym: None,
        series: Some(meta),
    })
}

/// Default series index radius `2|n| + 8`.
pub fn default_index_radius(n: i64) -> i64 {
    2 * n.abs() + 8
}

pub const DEFAULT_NU_MAX: usize = 4;

fn schur_eval<T: Real>(n: i64, z: Complex64, m: [[Complex<T>; 2]; 2]) -> ReducedEval {
    let half = T::of(0.5);
    let alpha = lift::<T>(z) + (m[0][0] + m[1][1]) * half;
    ReducedEval {
        n,
        z,
        alpha: Some(lower(alpha)),
        beta_plus: lower(m[1][0]),
        beta_minus: lower(m[0][1]),
        route: Route::Schur,
        nu_max: None,
        index_radius: None,
        diag_asym: Some(abs(m[0][0] - m[1][1]).as_f64()),
        series: None,
    }
}

fn shift_of<T: Real>(n: i64, z: Complex64) -> Complex<T> {
    lift::<T>(Complex64::new(n as f64, 0.0)) + lift::<T>(z)
}

/// Schur complement of `matrix − (n + z)` onto the two coordinates of index `n`.
pub fn schur_reduction<T: Real>(
    matrix: &ComplexMatrix<T>,
    basis: &Basis,
    n: i64,
    z: Complex64,
) -> Result<ReducedEval, ReductionError> {
    let e = basis.pair_positions(n).ok_or(ReductionError::OutsideBasis { n })?;
    let d = matrix.rows();
    if d != basis.dim() || !matrix.is_square() {
        return Err(ReductionError::BadInput("matrix does not match the basis".into()));
    }
    let a = matrix.shifted(shift_of::<T>(n, z));
    let rest: Vec<usize> = (0..d).filter(|k| !e.contains(k)).collect();
    let mut m = [[a[(e[0], e[0])], a[(e[0], e[1])]], [a[(e[1], e[0])], a[(e[1], e[1])]]];
    if !rest.is_empty() {
        let aff = ComplexMatrix::from_fn(rest.len(), rest.len(), |i, j| a[(rest[i], rest[j])]);
        let afe = ComplexMatrix::from_fn(rest.len(), 2, |i, c| a[(rest[i], e[c])]);
        let x = lu_factor(&aff).map_err(|_| ReductionError::ForeignEigenvalue { n, z })?.solve(&afe);
        for r in 0..2 {
            for c in 0..2 {
                for (i, &k) in rest.iter().enumerate() {
                    m[r][c] = m[r][c] - a[(e[r], k)] * x[(i, c)];
                }
            }
        }
    }
    Ok(schur_eval(n, z, m))
}

/// Anything that evaluates the reduced matrix at `(n, z)`; must be safe to
/// call from several threads.
pub trait Reducer: Sync {
    fn reduce(&self, n: i64, z: Complex64) -> Result<ReducedEval, ReductionError>;
}

impl<F> Reducer for F
where
    F: Fn(i64, Complex64) -> Result<ReducedEval, ReductionError> + Sync,
{
    fn reduce(&self, n: i64, z: Complex64) -> Result<ReducedEval, ReductionError> {
        self(n, z)
    }
}

#[derive(Clone, Debug)]
enum BandStore {
    Double(BandedMatrix<f64>),
    Extended(BandedMatrix<Extended>),
}

/// Schur route on the band form of the truncated matrix.
#[derive(Clone, Debug)]
pub struct SchurReducer {
    basis: Basis,
    store: BandStore,
}

fn band_schur<T: Real>(
    h: &BandedMatrix<T>,
    e: [usize; 2],
    n: i64,
    z: Complex64,
) -> Result<[[Complex<T>; 2]; 2], ReductionError> {
    let d = h.dim();
    let mut a = h.clone();
    a.shift_diagonal(shift_of::<T>(n, z));
    let zero = Complex::new(T::zero(), T::zero());
    let mut m = [[a.get(e[0], e[0]), a.get(e[0], e[1])], [a.get(e[1], e[0]), a.get(e[1], e[1])]];
    let mut rhs = [vec![zero; d], vec![zero; d]];
    let mut coupling: [Vec<(usize, Complex<T>)>; 2] = [Vec::new(), Vec::new()];
    for c in 0..2 {
        for k in 0..d {
            if e.contains(&k) {
                continue;
            }
            if a.in_band(k, e[c]) {
                rhs[c][k] = a.get(k, e[c]);
            }
            if a.in_band(e[c], k) {
                let x = a.get(e[c], k);
                if x != zero {
                    coupling[c].push((k, x));
                }
            }
        }
    }
    // decouple the two coordinates: unit rows and columns
    for &p in &e {
        for k in 0..d {
            if a.in_band(p, k) {
                a.set(p, k, zero);
            }
            if a.in_band(k, p) {
                a.set(k, p, zero);
            }
        }
        a.set(p, p, Complex::new(T::one(), T::zero()));
    }
    let lu = a.factor().map_err(|_| ReductionError::ForeignEigenvalue { n, z })?;
    let x = [lu.solve(&rhs[0]), lu.solve(&rhs[1])];
    for r in 0..2 {
        for c in 0..2 {
            for &(k, w) in &coupling[r] {
                m[r][c] = m[r][c] - w * x[c][k];
            }
        }
    }
    Ok(m)
}

impl SchurReducer {
    pub fn new(v: &FourierPotential, bc: Boundary, cfg: &DiscretizationConfig) -> Self {
        Self::with_basis(v, Basis::full(bc, cfg), cfg.precision)
    }

    pub fn with_basis(v: &FourierPotential, basis: Basis, precision: Precision) -> Self {
        let store = match precision {
            Precision::Double => BandStore::Double(basis.assemble_banded(v)),
            Precision::Extended => BandStore::Extended(basis.assemble_banded(v)),
        };
        Self { basis, store }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn precision(&self) -> Precision {
        match self.store {
            BandStore::Double(_) => Precision::Double,
            BandStore::Extended(_) => Precision::Extended,
        }
    }
}

impl Reducer for SchurReducer {
    fn reduce(&self, n: i64, z: Complex64) -> Result<ReducedEval, ReductionError> {
        let e = self.basis.pair_positions(n).ok_or(ReductionError::OutsideBasis { n })?;
        Ok(match &self.store {
            BandStore::Double(h) => schur_eval(n, z, band_schur(h, e, n, z)?),
            BandStore::Extended(h) => schur_eval(n, z, band_schur(h, e, n, z)?),
        })
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Argument of `w` on the branch closest to `reference`.
fn continue_arg(w: Complex64, reference: f64) -> f64 {
    reference + wrap_angle(w.arg() - reference)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasicEqConfig {
    pub fp_tolerance: f64,
    pub max_iter: usize,
    /// Consecutive growing steps that signal divergence.
    pub growth_steps: usize,
    pub zero_threshold: f64,
}

impl Default for BasicEqConfig {
    fn default() -> Self {
        Self { fp_tolerance: 1e-12, max_iter: 100, growth_steps: 5, zero_threshold: 1e-13 }
    }
}

impl BasicEqConfig {
    pub fn for_potential(v: &FourierPotential, precision: Precision) -> Self {
        Self { zero_threshold: default_zero_threshold(v, precision), ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasicEqRoots {
    pub n: i64,
    /// Fixed point of `z = α + β⁺ √η`.
    pub z1: Complex64,
    /// Fixed point of `z = α − β⁺ √η`.
    pub z2: Complex64,
    pub iterations: usize,
    pub residuals: [f64; 2],
    /// `β⁺` vanished at the disc centre; roots come from `(z − α)² = β⁺β⁻`.
    pub degenerate: bool,
}

fn iterate(
    n: i64,
    cfg: &BasicEqConfig,
    mut step: impl FnMut(Complex64) -> Result<Complex64, ReductionError>,
) -> Result<(Complex64, usize, f64), ReductionError> {
    let mut z = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    let mut growing = 0;
    for it in 1..=cfg.max_iter {
        let next = step(z)?;
        let dz = (next - z).norm();
        z = next;
        if dz < cfg.fp_tolerance {
            let residual = (step(z)? - z).norm();
            return Ok((z, it, residual));
        }
        growing = if dz > last { growing + 1 } else { 0 };
        if growing >= cfg.growth_steps || !z.is_finite() || z.norm() > 0.5 {
            return Err(ReductionError::NonContraction { n });
        }
        last = dz;
    }
    Err(ReductionError::NonContraction { n })
}

/// Both roots in the disc around `n` of the scalar equations
/// `z = α(z) ± β⁺(z) √(β⁻(z)/β⁺(z))`, with the square root taken on the
/// branch anchored at `z = 0`.
pub fn solve_basic_equation(
    n: i64,
    reducer: &dyn Reducer,
    cfg: &BasicEqConfig,
) -> Result<BasicEqRoots, ReductionError> {
    let centre = reducer.reduce(n, Complex64::new(0.0, 0.0))?;
    let degenerate = centre.beta_plus.norm() <= cfg.zero_threshold;
    let anchor = centre.eta().map(|e| e.arg()).unwrap_or(0.0);
    let zeta = |z: Complex64, sign: f64| -> Result<Complex64, ReductionError> {
        let ev = reducer.reduce(n, z)?;
        let alpha = ev.alpha_or_err()?;
        let root = if degenerate || ev.beta_plus.norm() == 0.0 {
            let prod = ev.beta_plus * ev.beta_minus;
            Complex64::from_polar(prod.norm().sqrt(), continue_arg(prod, 0.0) / 2.0)
        } else {
            let eta = ev.beta_minus / ev.beta_plus;
            ev.beta_plus * Complex64::from_polar(eta.norm().sqrt(), continue_arg(eta, anchor) / 2.0)
        };
        Ok(alpha + root * sign)
    };
    let (z1, it1, r1) = iterate(n, cfg, |z| zeta(z, 1.0))?;
    let (z2, it2, r2) = iterate(n, cfg, |z| zeta(z, -1.0))?;
    Ok(BasicEqRoots { n, z1, z2, iterations: it1.max(it2), residuals: [r1, r2], degenerate })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchSample {
    pub z: Complex64,
    pub eta: Complex64,
    /// Continuous argument of `η`.
    pub phi: f64,
}

/// `η = β⁻/β⁺` along the segment from `z1` to `z2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchData {
    pub n: i64,
    pub samples: Vec<BranchSample>,
    /// Midpoint, where the principal argument is taken.
    pub anchor: Complex64,
    /// `η` exists along the segment and consecutive arguments differ by less than `π/2`.
    pub continuous: bool,
    /// `(φ(z1) − φ(z2)) / 2` when continuous.
    pub psi: Option<f64>,
    pub eta_min: f64,
    pub eta_max: f64,
}

impl BranchData {
    pub fn eta_at_ends(&self) -> Option<(Complex64, Complex64)> {
        Some((self.samples.first()?.eta, self.samples.last()?.eta))
    }
}

pub const BRANCH_SAMPLES: usize = 33;

/// Tracks the argument of `η` on `[z1, z2]` by nearest-argument continuation
/// from the principal value at the midpoint.
pub fn track_branch(
    n: i64,
    reducer: &dyn Reducer,
    z1: Complex64,
    z2: Complex64,
    samples: usize,
) -> Result<BranchData, ReductionError> {
    let k = samples.max(3) | 1;
    let pts: Vec<Complex64> = (0..k).map(|i| z1 + (z2 - z1) * (i as f64 / (k - 1) as f64)).collect();
    let mid = k / 2;
    let etas: Vec<Option<Complex64>> =
        pts.iter().map(|&z| reducer.reduce(n, z).map(|e| e.eta())).collect::<Result<_, _>>()?;
    if etas.iter().any(|e| e.map_or(true, |w| w.norm() == 0.0 || !w.is_finite())) {
        let mags: Vec<f64> = etas.iter().flatten().map(|e| e.norm()).collect();
        return Ok(BranchData {
            n,
            samples: Vec::new(),
            anchor: pts[mid],
            continuous: false,
            psi: None,
            eta_min: mags.iter().copied().fold(f64::INFINITY, f64::min),
            eta_max: mags.iter().copied().fold(0.0, f64::max),
        });
    }
    let etas: Vec<Complex64> = etas.into_iter().flatten().collect();
    let mut phi = vec![0.0; k];
    phi[mid] = etas[mid].arg();
    for i in (0..mid).rev() {
        phi[i] = continue_arg(etas[i], phi[i + 1]);
    }
    for i in mid + 1..k {
        phi[i] = continue_arg(etas[i], phi[i - 1]);
    }
    let continuous = phi.windows(2).all(|w| (w[1] - w[0]).abs() < PI / 2.0);
    let mags = etas.iter().map(|e| e.norm());
    Ok(BranchData {
        n,
        anchor: pts[mid],
        continuous,
        psi: continuous.then(|| 0.5 * (phi[0] - phi[k - 1])),
        eta_min: mags.clone().fold(f64::INFINITY, f64::min),
        eta_max: mags.fold(0.0, f64::max),
        samples: pts.into_iter().zip(etas).zip(phi).map(|((z, eta), phi)| BranchSample { z, eta, phi }).collect(),
    })
}

/// Complex number as `exp(log_abs + i·arg)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogPolar {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogPolar {
    pub fn magnitude(&self) -> f64 {
        self.log_abs.exp()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude(), self.arg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticBeta {
    pub plus: LogPolar,
    pub minus: LogPolar,
}

fn power_term(base: Complex64, exponent: u64) -> (f64, f64) {
    if exponent == 0 {
        (0.0, 0.0)
    } else {
        (exponent as f64 * base.norm().ln(), exponent as f64 * base.arg())
    }
}

/// Leading terms of `β_n^±(0)` for `P = a e^{2ix} + b e^{−2ix}`,
/// `Q = A e^{2ix} + B e^{−2ix}` and odd `n ≥ 1`:
/// `β⁺ ≈ A^{(n+1)/2} a^{(n−1)/2} / (4^{n−1} ((n−1)/2)!²)` and
/// `β⁻ ≈ b^{(n+1)/2} B^{(n−1)/2} / (4^{n−1} ((n−1)/2)!²)`.
pub fn asymptotic_beta(
    n: i64,
    a: Complex64,
    b: Complex64,
    big_a: Complex64,
    big_b: Complex64,
) -> Result<AsymptoticBeta, ReductionError> {
    if n < 1 || n % 2 == 0 {
        return Err(ReductionError::BadInput(format!("asymptotics need a positive odd index, got {n}")));
    }
    let nu = ((n - 1) / 2) as u64;
    let scale = (n - 1) as f64 * 4f64.ln() + 2.0 * ln_factorial(nu);
    let side = |long: Complex64, short: Complex64| {
        let (l1, a1) = power_term(long, nu + 1);
        let (l2, a2) = power_term(short, nu);
        LogPolar { log_abs: l1 + l2 - scale, arg: wrap_angle(a1 + a2) }
    };
    Ok(AsymptoticBeta { plus: side(big_a, a), minus: side(b, big_b) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_trig_potential;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ratio_conventions() {
        let ev = |bp: f64, bm: f64| ReducedEval {
            n: 3,
            z: c(0.0),
            alpha: None,
            beta_plus: c(bp),
            beta_minus: c(bm),
            route: Route::Series,
            nu_max: None,
            index_radius: None,
            diag_asym: None,
            series: None,
        };
        assert_eq!(t_ratio(&ev(0.0, 0.0), 1e-13), ExtReal::Finite(1.0));
        assert_eq!(t_ratio(&ev(0.0, 5.0), 1e-13), ExtReal::Infinite);
        assert_eq!(t_ratio(&ev(2.0, 1.0), 1e-13), ExtReal::Finite(0.5));
        assert_eq!(serde_json::to_string(&ExtReal::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn asymptotic_small_cases() {
        let one = c(1.0);
        let r = asymptotic_beta(1, c(3.0), one, c(2.0), one).unwrap();
        assert_relative_eq!(r.plus.to_complex().re, 2.0, epsilon = 1e-14);
        let r = asymptotic_beta(3, one, one, one, one).unwrap();
        assert_relative_eq!(r.plus.magnitude(), 1.0 / 16.0, epsilon = 1e-15);
        let r = asymptotic_beta(5, c(0.0), one, one, one).unwrap();
        assert_eq!(r.plus.log_abs, f64::NEG_INFINITY);
        assert!(asymptotic_beta(4, one, one, one, one).is_err());
    }

    #[test]
    fn series_first_order_and_support() {
        let v = FourierPotential::from_coefficients([(-6, c(0.1))], [(6, c(0.05))]).unwrap();
        let ev = beta_series(&v, 3, c(0.0), 0, 8).unwrap();
        assert_eq!(ev.beta_plus, c(0.05));
        assert_eq!(ev.beta_minus, c(0.1));
        let trig = make_trig_potential(c(1.0), c(1.0), c(1.0), c(1.0));
        let ev = beta_series(&trig, 5, c(0.0), 1, 18).unwrap();
        assert_eq!(ev.beta_plus, c(0.0));
        assert!(ev.series.as_ref().unwrap().empty);
        let ev = beta_series(&trig, 4, c(0.1), 6, 16).unwrap();
        assert_eq!((ev.beta_plus, ev.beta_minus), (c(0.0), c(0.0)));
    }

    #[test]
    fn series_leading_order_matches_closed_form() {
        let (a, b, big_a, big_b) = (Complex64::new(0.5, 0.2), c(0.3), Complex64::new(0.1, -0.4), c(0.7));
        let v = make_trig_potential(a, b, big_a, big_b);
        for n in [3, 5, 7] {
            let nu = ((n - 1) / 2) as usize;
            let ev = beta_series(&v, n, c(0.0), nu, 2 * n + 8).unwrap();
            let asym = asymptotic_beta(n, a, b, big_a, big_b).unwrap();
            // at the leading order only the extremal path survives
            assert!((ev.beta_plus - asym.plus.to_complex()).norm() < 1e-12 * asym.plus.magnitude());
            assert!((ev.beta_minus - asym.minus.to_complex()).norm() < 1e-12 * asym.minus.magnitude());
        }
    }

    #[test]
    fn dense_and_band_schur_agree() {
        let v = make_trig_potential(c(1.0), Complex64::new(0.5, 0.5), c(2.0), c(1.0));
        let cfg = DiscretizationConfig::new(10).with_precision(Precision::Double);
        let basis = Basis::full(Boundary::Antiperiodic, &cfg);
        let dense = basis.assemble_banded::<f64>(&v).to_dense();
        let red = SchurReducer::new(&v, Boundary::Antiperiodic, &cfg);
        for (n, z) in [(3, Complex64::new(0.1, 0.05)), (-7, c(0.0)), (9, Complex64::new(-0.2, 0.1))] {
            let d = schur_reduction(&dense, &basis, n, z).unwrap();
            let b = red.reduce(n, z).unwrap();
            assert!((d.beta_plus - b.beta_plus).norm() < 1e-13);
            assert!((d.beta_minus - b.beta_minus).norm() < 1e-13);
            assert!((d.alpha.unwrap() - b.alpha.unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn free_reduction_vanishes() {
        let cfg = DiscretizationConfig::new(8);
        let red = SchurReducer::new(&FourierPotential::zero(), Boundary::Periodic, &cfg);
        let ev = red.reduce(4, Complex64::new(0.1, 0.1)).unwrap();
        assert_eq!((ev.alpha.unwrap(), ev.beta_plus, ev.beta_minus, ev.diag_asym), (c(0.0), c(0.0), c(0.0), Some(0.0)));
        let roots = solve_basic_equation(4, &red, &BasicEqConfig::default()).unwrap();
        assert_eq!((roots.z1, roots.z2), (c(0.0), c(0.0)));
        assert!(roots.degenerate);
    }

    #[test]
    fn closures_are_reducers() {
        let r = |n: i64, z: Complex64| -> Result<ReducedEval, ReductionError> {
            Ok(ReducedEval {
                n,
                z,
                alpha: Some(c(0.01)),
                beta_plus: c(0.02),
                beta_minus: c(0.08),
                route: Route::Schur,
                nu_max: None,
                index_radius: None,
                diag_asym: Some(0.0),
                series: None,
            })
        };
        let roots = solve_basic_equation(5, &r, &BasicEqConfig::default()).unwrap();
        assert_relative_eq!(roots.z1.re, 0.05, epsilon = 1e-15);
        assert_relative_eq!(roots.z2.re, -0.03, epsilon = 1e-15);
        let br = track_branch(5, &r, roots.z1, roots.z2, 33).unwrap();
        assert!(br.continuous);
        assert_eq!(br.psi, Some(0.0));
    }
}
