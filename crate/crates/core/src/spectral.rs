//! Spectrum of the truncated operator, localization into discs around the
//! lattice points, and rank-two spectral projections.

use std::f64::consts::TAU;

use dirac_linalg::{
    abs, eigen_decompose, lower, spectral_norm, BandedMatrix, ComplexMatrix, EigenConfig, EigenResult, Extended,
    Real, SchurForm,
};
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{Basis, Boundary, DiscretizationConfig, Precision};
use crate::error::CoreError;
use crate::potential::FourierPotential;

/// Radius of the localization discs.
pub const DISC_RADIUS: f64 = 0.25;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two eigenvalues captured by the disc around `n`.
#[derive(Clone, Debug)]
pub struct SpectralPair {
    pub n: i64,
    pub lambda_minus: Complex64,
    pub lambda_plus: Complex64,
    /// `λ⁺ − λ⁻` formed in working precision before rounding to `f64`.
    pub split: Complex64,
    pub gap: f64,
    pub z_star: Complex64,
    /// Unit eigenvector for `λ⁺`.
    pub f: Vec<Complex64>,
    /// Unit eigenvector for `λ⁻`; for a double eigenvalue, a unit vector of
    /// the spectral subspace orthogonal to `f`.
    pub g: Vec<Complex64>,
    pub simple: bool,
    pub defective: bool,
}

impl SpectralPair {
    /// Ordering by real part, then imaginary part, judged on the exact split.
    pub fn is_ordered(&self) -> bool {
        self.split.re > 0.0 || (self.split.re == 0.0 && self.split.im >= 0.0)
    }
}

/// `⟨f, g⟩`, linear in the first argument.
pub fn inner(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    f.iter().zip(g).map(|(a, b)| a * b.conj()).sum()
}

pub fn overlap(pair: &SpectralPair) -> Complex64 {
    inner(&pair.f, &pair.g)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationIssue {
    pub n: i64,
    /// Number of eigenvalues found in the disc (not 2).
    pub count: usize,
    pub eigenvalues: Vec<Complex64>,
}

#[derive(Clone, Debug, Default)]
pub struct Localization {
    pub pairs: Vec<SpectralPair>,
    /// Eigenvalues outside every disc of the window.
    pub leftovers: Vec<Complex64>,
    pub issues: Vec<LocalizationIssue>,
}

impl Localization {
    pub fn pair(&self, n: i64) -> Option<&SpectralPair> {
        self.pairs.iter().find(|p| p.n == n)
    }
}

fn to_c64<T: Real>(v: &[Complex<T>]) -> Vec<Complex64> {
    v.iter().map(|&z| lower(z)).collect()
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Component of `v` orthogonal to the unit vector `f`, normalized, with its
/// norm before normalization.
fn orthogonal_part(v: &[Complex64], f: &[Complex64]) -> (Vec<Complex64>, f64) {
    let c = inner(v, f);
    let w: Vec<Complex64> = v.iter().zip(f).map(|(a, b)| a - c * b).collect();
    let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (w.into_iter().map(|z| z / n).collect(), n)
}

/// Sorts eigenvalues into the discs `|z − n| < 1/4` of the trusted window.
pub fn localize_spectrum<T: Real>(
    eig: &EigenResult<T>,
    basis: &Basis,
    cfg: &DiscretizationConfig,
) -> Result<Localization, CoreError> {
    let bc = basis.boundary();
    let values: Vec<Complex64> = to_c64(&eig.eigenvalues);
    let threshold = cfg.split_factor * T::UNIT_ROUNDOFF * eig.matrix_norm;
    let mut captured = vec![false; values.len()];
    let mut out = Localization::default();
    let schur64 = schur_to_f64(&eig.schur);
    for n in cfg.window(bc) {
        let centre = Complex64::new(n as f64, 0.0);
        let inside: Vec<usize> = (0..values.len()).filter(|&k| (values[k] - centre).norm() < DISC_RADIUS).collect();
        for &k in &inside {
            captured[k] = true;
        }
        if inside.len() != 2 {
            out.issues.push(LocalizationIssue {
                n,
                count: inside.len(),
                eigenvalues: inside.iter().map(|&k| values[k]).collect(),
            });
            continue;
        }
        // eigenvalues are sorted, so the first one is λ⁻
        let (km, kp) = (inside[0], inside[1]);
        let split_t = eig.eigenvalues[kp] - eig.eigenvalues[km];
        let gap = abs(split_t).as_f64();
        let simple = gap > threshold;
        let f = normalized(to_c64(&eig.eigenvector(kp)));
        let minus = to_c64(&eig.eigenvector(km));
        let g = if simple {
            normalized(minus)
        } else {
            let (g, size) = orthogonal_part(&minus, &f);
            if size > 1e-6 {
                g
            } else {
                let proj = schur_projection(&schur64, basis, n, cfg.contour_nodes)?;
                let (g0, s0) = orthogonal_part(&proj.range[0], &f);
                let (g1, s1) = orthogonal_part(&proj.range[1], &f);
                if s0 >= s1 {
                    g0
                } else {
                    g1
                }
            }
        };
        let lm = values[km];
        let lp = values[kp];
        out.pairs.push(SpectralPair {
            n,
            lambda_minus: lm,
            lambda_plus: lp,
            split: lower(split_t),
            gap,
            z_star: lower((eig.eigenvalues[kp] + eig.eigenvalues[km]) * T::of(0.5)) - centre,
            f,
            g,
            simple,
            defective: !simple && (eig.defective[km] || eig.defective[kp]),
        });
    }
    out.leftovers = (0..values.len()).filter(|&k| !captured[k]).map(|k| values[k]).collect();
    Ok(out)
}

/// Rank-two projection `P = X (Yᴴ X)⁻¹ Yᴴ` where the columns of `X` are
/// `P e` and those of `Y` are `Pᴴ e` for the two coordinates `e` of index `n`.
#[derive(Clone, Debug)]
pub struct RankTwoProjection {
    pub n: i64,
    pub positions: [usize; 2],
    pub range: [Vec<Complex64>; 2],
    pub corange: [Vec<Complex64>; 2],
    /// `(Yᴴ X)⁻¹`
    pub core: [[Complex64; 2]; 2],
    /// Eigenvalues enclosed by the contour, when counted.
    pub enclosed: Option<i64>,
}

fn inv2(m: [[Complex64; 2]; 2]) -> Option<[[Complex64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

impl RankTwoProjection {
    fn assemble(
        n: i64,
        positions: [usize; 2],
        range: [Vec<Complex64>; 2],
        corange: [Vec<Complex64>; 2],
        enclosed: Option<i64>,
    ) -> Result<Self, CoreError> {
        let gram = [
            [inner(&range[0], &corange[0]), inner(&range[1], &corange[0])],
            [inner(&range[0], &corange[1]), inner(&range[1], &corange[1])],
        ];
        let core = inv2(gram).ok_or(CoreError::NotLocalized { n })?;
        Ok(Self { n, positions, range, corange, core, enclosed })
    }

    pub fn dim(&self) -> usize {
        self.range[0].len()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let c = [inner(v, &self.corange[0]), inner(v, &self.corange[1])];
        let w = [self.core[0][0] * c[0] + self.core[0][1] * c[1], self.core[1][0] * c[0] + self.core[1][1] * c[1]];
        (0..self.dim()).map(|i| self.range[0][i] * w[0] + self.range[1][i] * w[1]).collect()
    }

    pub fn to_dense(&self) -> ComplexMatrix<f64> {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut s = ZERO;
                for a in 0..2 {
                    for b in 0..2 {
                        s += self.range[a][i] * self.core[a][b] * self.corange[b][j].conj();
                    }
                }
                m[(i, j)] = s;
            }
        }
        m
    }

    /// `‖P − P⁰‖₂` with `P⁰` the coordinate projection onto index `n`,
    /// evaluated on the at most four-dimensional range of the difference.
    pub fn deviation_from_free(&self) -> Result<f64, CoreError> {
        let d = self.dim();
        let unit = |p: usize| {
            let mut e = vec![ZERO; d];
            e[p] = Complex64::new(1.0, 0.0);
            e
        };
        let left = [self.range[0].clone(), self.range[1].clone(), unit(self.positions[0]), unit(self.positions[1])];
        let right = [self.corange[0].clone(), self.corange[1].clone(), unit(self.positions[0]), unit(self.positions[1])];
        let r1 = gram_schmidt_r(&left);
        let r2 = gram_schmidt_r(&right);
        let mut core = [[ZERO; 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                core[a][b] = self.core[a][b];
            }
        }
        core[2][2] = Complex64::new(-1.0, 0.0);
        core[3][3] = Complex64::new(-1.0, 0.0);
        // D = R1 · core · R2ᴴ
        let k1 = r1.len();
        let k2 = r2.len();
        let mut dm = ComplexMatrix::<f64>::zeros(k1.max(1), k2.max(1));
        for i in 0..k1 {
            for j in 0..k2 {
                let mut s = ZERO;
                for a in 0..4 {
                    for b in 0..4 {
                        s += r1[i][a] * core[a][b] * r2[j][b].conj();
                    }
                }
                dm[(i, j)] = s;
            }
        }
        Ok(spectral_norm(&dm)?)
    }
}

/// Rows of the triangular factor of a thin QR of the given columns, with
/// numerically dependent directions dropped.
fn gram_schmidt_r(cols: &[Vec<Complex64>; 4]) -> Vec<[Complex64; 4]> {
    let scale = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    let mut r: Vec<[Complex64; 4]> = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        let mut w = col.clone();
        let mut coeffs = vec![ZERO; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let c = inner(&w, qk);
                coeffs[k] += c;
                for (wi, qi) in w.iter_mut().zip(qk) {
                    *wi -= c * qi;
                }
            }
        }
        for (k, c) in coeffs.iter().enumerate() {
            r[k][j] = *c;
        }
        let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nw > 1e-13 * scale.max(1.0) {
            let mut row = [ZERO; 4];
            row[j] = Complex64::new(nw, 0.0);
            r.push(row);
            q.push(w.into_iter().map(|z| z / nw).collect());
        }
    }
    r
}

fn schur_to_f64<T: Real>(s: &SchurForm<T>) -> SchurForm<f64> {
    SchurForm { t: s.t.to_c64(), z: s.z.to_c64() }
}

fn contour_nodes(n: i64, nodes: usize) -> impl Iterator<Item = (Complex64, Complex64)> {
    (0..nodes).map(move |k| {
        let theta = TAU * (k as f64 + 0.5) / nodes as f64;
        let offset = Complex64::from_polar(DISC_RADIUS, theta);
        (Complex64::new(n as f64, 0.0) + offset, offset / nodes as f64)
    })
}

/// Projection for index `n` by the trapezoid rule on `|z − n| = 1/4`,
/// using triangular solves with a Schur form of the matrix.
pub fn schur_projection(
    s: &SchurForm<f64>,
    basis: &Basis,
    n: i64,
    nodes: usize,
) -> Result<RankTwoProjection, CoreError> {
    let positions = basis.pair_positions(n).ok_or(CoreError::NotLocalized { n })?;
    let d = s.t.rows();
    let t = &s.t;
    let seeds: Vec<Vec<Complex64>> = positions.iter().map(|&p| (0..d).map(|i| s.z[(p, i)].conj()).collect()).collect();
    let mut acc_r = vec![vec![ZERO; d]; 2];
    let mut acc_l = vec![vec![ZERO; d]; 2];
    for (z, w) in contour_nodes(n, nodes) {
        for c in 0..2 {
            // (z − T) u = seed
            let mut u = seeds[c].clone();
            for i in (0..d).rev() {
                let mut acc = u[i];
                for j in i + 1..d {
                    acc += t[(i, j)] * u[j];
                }
                u[i] = acc / (z - t[(i, i)]);
            }
            // (z̄ − Tᴴ) y = seed
            let mut y = seeds[c].clone();
            for i in 0..d {
                let mut acc = y[i];
                for j in 0..i {
                    acc += t[(j, i)].conj() * y[j];
                }
                y[i] = acc / (z.conj() - t[(i, i)].conj());
            }
            for i in 0..d {
                acc_r[c][i] += w * u[i];
                acc_l[c][i] += w.conj() * y[i];
            }
        }
    }
    let map = |v: &Vec<Complex64>| s.z.mul_vec(v);
    RankTwoProjection::assemble(
        n,
        positions,
        [map(&acc_r[0]), map(&acc_r[1])],
        [map(&acc_l[0]), map(&acc_l[1])],
        None,
    )
}

/// Projection for index `n` from band LU solves at each contour node. Also
/// counts enclosed eigenvalues by the winding of `det(H − z)`.
pub fn banded_projection(
    h: &BandedMatrix<f64>,
    basis: &Basis,
    n: i64,
    nodes: usize,
) -> Result<RankTwoProjection, CoreError> {
    let positions = basis.pair_positions(n).ok_or(CoreError::NotLocalized { n })?;
    let d = h.dim();
    let mut acc_r = vec![vec![ZERO; d]; 2];
    let mut acc_l = vec![vec![ZERO; d]; 2];
    let mut args = Vec::with_capacity(nodes);
    for (z, w) in contour_nodes(n, nodes) {
        let mut a = h.clone();
        a.shift_diagonal(z);
        let lu = a.factor()?;
        args.push(lu.determinant_arg());
        for c in 0..2 {
            let mut e = vec![ZERO; d];
            e[positions[c]] = Complex64::new(1.0, 0.0);
            // (H − z)⁻¹ = −(z − H)⁻¹
            let u = lu.solve(&e);
            let y = lu.solve_adjoint(&e);
            for i in 0..d {
                acc_r[c][i] -= w * u[i];
                acc_l[c][i] -= w.conj() * y[i];
            }
        }
    }
    let mut turn = 0.0;
    for k in 0..nodes {
        let mut delta = args[(k + 1) % nodes] - args[k];
        delta -= TAU * (delta / TAU).round();
        turn += delta;
    }
    let enclosed = (turn / TAU).round() as i64;
    let [r0, r1]: [Vec<Complex64>; 2] = acc_r.try_into().expect("two columns");
    let [l0, l1]: [Vec<Complex64>; 2] = acc_l.try_into().expect("two columns");
    RankTwoProjection::assemble(n, positions, [r0, r1], [l0, l1], Some(enclosed))
}

/// Projection onto the spectral subspace of the disc around `n`.
pub fn riesz_projection<T: Real>(
    eig: &EigenResult<T>,
    basis: &Basis,
    n: i64,
    nodes: usize,
) -> Result<RankTwoProjection, CoreError> {
    schur_projection(&schur_to_f64(&eig.schur), basis, n, nodes)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionDeviation {
    pub n: i64,
    /// `‖P_n − P_n⁰‖₂`
    pub deviation: f64,
    /// Eigenvalues inside the contour; 2 when localization holds.
    pub enclosed: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BariMarkusProfile {
    pub deviations: Vec<ProjectionDeviation>,
    /// `Σ deviation²` over localized indices.
    pub partial_sum: f64,
    /// Indices whose disc does not hold exactly two eigenvalues.
    pub unlocalized: Vec<i64>,
}

/// `‖P_n − P_n⁰‖` over the trusted window, from band solves.
pub fn bari_markus_profile(
    v: &FourierPotential,
    bc: Boundary,
    cfg: &DiscretizationConfig,
) -> Result<BariMarkusProfile, CoreError> {
    cfg.validate()?;
    let full = Basis::full(bc, cfg);
    let shared = match cfg.projection_halfwidth {
        None => Some(full.assemble_banded::<f64>(v)),
        Some(_) => None,
    };
    let deviations = cfg
        .window(bc)
        .into_par_iter()
        .map(|n| {
            let proj = match (cfg.projection_halfwidth, &shared) {
                (None, Some(h)) => banded_projection(h, &full, n, cfg.contour_nodes)?,
                (Some(w), _) => {
                    let local = Basis::local(bc, cfg, n, w);
                    banded_projection(&local.assemble_banded(v), &local, n, cfg.contour_nodes)?
                }
                (None, None) => unreachable!(),
            };
            Ok(ProjectionDeviation {
                n,
                deviation: proj.deviation_from_free()?,
                enclosed: proj.enclosed.unwrap_or(2),
            })
        })
        .collect::<Result<Vec<_>, CoreError>>()?;
    let unlocalized = deviations.iter().filter(|d| d.enclosed != 2).map(|d| d.n).collect();
    let partial_sum = deviations.iter().filter(|d| d.enclosed == 2).map(|d| d.deviation.powi(2)).sum();
    Ok(BariMarkusProfile { deviations, partial_sum, unlocalized })
}

/// Complete spectral computation for one potential and boundary condition.
#[derive(Clone, Debug)]
pub struct SpectralRun {
    pub bc: Boundary,
    pub cfg: DiscretizationConfig,
    pub basis: Basis,
    pub eigenvalues: Vec<Complex64>,
    pub worst_residual: f64,
    pub matrix_norm: f64,
    pub localization: Localization,
    schur: SchurForm<f64>,
}

impl SpectralRun {
    pub fn pairs(&self) -> &[SpectralPair] {
        &self.localization.pairs
    }

    pub fn pair(&self, n: i64) -> Option<&SpectralPair> {
        self.localization.pair(n)
    }

    pub fn riesz_projection(&self, n: i64) -> Result<RankTwoProjection, CoreError> {
        schur_projection(&self.schur, &self.basis, n, self.cfg.contour_nodes)
    }

    pub fn has_issues(&self) -> bool {
        !self.localization.issues.is_empty()
    }
}

fn spectrum_in<T: Real>(
    v: &FourierPotential,
    bc: Boundary,
    cfg: &DiscretizationConfig,
) -> Result<SpectralRun, CoreError> {
    let basis = Basis::full(bc, cfg);
    let m = basis.assemble_banded::<T>(v).to_dense();
    let eig = eigen_decompose(&m, &EigenConfig::with_tolerance(cfg.eig_tolerance))?;
    let localization = localize_spectrum(&eig, &basis, cfg)?;
    Ok(SpectralRun {
        bc,
        cfg: cfg.clone(),
        eigenvalues: to_c64(&eig.eigenvalues),
        worst_residual: eig.worst_residual(),
        matrix_norm: eig.matrix_norm,
        schur: schur_to_f64(&eig.schur),
        basis,
        localization,
    })
}

pub fn compute_spectrum(
    v: &FourierPotential,
    bc: Boundary,
    cfg: &DiscretizationConfig,
) -> Result<SpectralRun, CoreError> {
    cfg.validate()?;
    match cfg.precision {
        Precision::Double => spectrum_in::<f64>(v, bc, cfg),
        Precision::Extended => spectrum_in::<Extended>(v, bc, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_trig_potential;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn free_pairs_are_exact() {
        let cfg = DiscretizationConfig::new(6).with_precision(Precision::Double);
        let run = compute_spectrum(&FourierPotential::zero(), Boundary::Periodic, &cfg).unwrap();
        assert_eq!(run.pairs().len(), 3);
        for p in run.pairs() {
            assert_eq!(p.gap, 0.0);
            assert!(!p.simple);
            assert_eq!(p.lambda_minus, Complex64::new(p.n as f64, 0.0));
            assert!(overlap(p).norm() < 1e-14);
        }
        assert!(run.localization.issues.is_empty());
        assert_eq!(run.localization.leftovers.len(), 26 - 6);
    }

    #[test]
    fn free_projection_is_coordinate() {
        let cfg = DiscretizationConfig::new(6).with_precision(Precision::Double);
        let run = compute_spectrum(&FourierPotential::zero(), Boundary::Antiperiodic, &cfg).unwrap();
        let p = run.riesz_projection(3).unwrap();
        assert!(p.deviation_from_free().unwrap() < 1e-14);
        let prof = bari_markus_profile(&FourierPotential::zero(), Boundary::Antiperiodic, &cfg).unwrap();
        assert!(prof.deviations.iter().all(|d| d.deviation < 1e-14 && d.enclosed == 2));
    }

    #[test]
    fn schur_and_band_projections_agree() {
        let v = make_trig_potential(Complex64::new(2.0, 0.5), one(), one(), Complex64::new(0.0, 1.0));
        let cfg = DiscretizationConfig::new(12).with_precision(Precision::Double);
        let run = compute_spectrum(&v, Boundary::Antiperiodic, &cfg).unwrap();
        let h = run.basis.assemble_banded::<f64>(&v);
        for n in [5, -7, 9] {
            let a = run.riesz_projection(n).unwrap();
            let b = banded_projection(&h, &run.basis, n, cfg.contour_nodes).unwrap();
            assert_eq!(b.enclosed, Some(2));
            let diff = a.to_dense().sub(&b.to_dense()).max_abs();
            assert!(diff < 1e-10, "n = {n}: {diff:e}");
            let pd = a.to_dense();
            assert!(pd.matmul(&pd).sub(&pd).max_abs() < 1e-8);
            let dense_dev = spectral_norm(&pd.sub(&coordinate_projection(&run.basis, n))).unwrap();
            assert!((dense_dev - a.deviation_from_free().unwrap()).abs() < 1e-10);
        }
    }

    fn coordinate_projection(basis: &Basis, n: i64) -> ComplexMatrix<f64> {
        let mut m = ComplexMatrix::zeros(basis.dim(), basis.dim());
        for p in basis.pair_positions(n).unwrap() {
            m[(p, p)] = one();
        }
        m
    }
}
