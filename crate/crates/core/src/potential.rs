//! Matrix potentials `v = [[0, P], [Q, 0]]` stored by their Fourier
//! coefficients on the even frequency lattice.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("frequency {0} is odd; coefficients live on even integers")]
    OddFrequency(i64),
    #[error("coefficient at frequency {0} is not finite")]
    NonFinite(i64),
    #[error("the X_t parameter must be a nonzero finite real, got {0}")]
    BadT(f64),
    #[error("sample arrays must be nonempty and of equal length")]
    BadSamples,
    #[error("cannot read potential file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid potential config: {0}")]
    Json(#[from] serde_json::Error),
}

/// Sparse coefficient map keyed by even frequency.
pub type Coefficients = BTreeMap<i64, Complex64>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierPotential {
    p: Coefficients,
    q: Coefficients,
}

fn checked(map: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Coefficients, PotentialError> {
    let mut out = Coefficients::new();
    for (m, c) in map {
        if m % 2 != 0 {
            return Err(PotentialError::OddFrequency(m));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(PotentialError::NonFinite(m));
        }
        if c != Complex64::new(0.0, 0.0) {
            *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }
    out.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(out)
}

impl FourierPotential {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coefficients(
        p: impl IntoIterator<Item = (i64, Complex64)>,
        q: impl IntoIterator<Item = (i64, Complex64)>,
    ) -> Result<Self, PotentialError> {
        Ok(Self { p: checked(p)?, q: checked(q)? })
    }

    pub fn p(&self, m: i64) -> Complex64 {
        self.p.get(&m).copied().unwrap_or_default()
    }

    pub fn q(&self, m: i64) -> Complex64 {
        self.q.get(&m).copied().unwrap_or_default()
    }

    pub fn p_coefficients(&self) -> &Coefficients {
        &self.p
    }

    pub fn q_coefficients(&self) -> &Coefficients {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_empty() && self.q.is_empty()
    }

    /// Largest `|m|` carrying a nonzero coefficient.
    pub fn support_radius(&self) -> i64 {
        self.p.keys().chain(self.q.keys()).map(|m| m.abs()).max().unwrap_or(0)
    }

    /// `r(m) = max(|p(m)|, |p(-m)|, |q(m)|, |q(-m)|)`.
    pub fn r(&self, m: i64) -> f64 {
        [self.p(m), self.p(-m), self.q(m), self.q(-m)].iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn frequencies(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = self.p.keys().chain(self.q.keys()).flat_map(|&m| [m, -m]).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// `E_m(r) = sqrt(Σ_{|k| ≥ m} r(k)²)`.
    pub fn tail_energy(&self, m: u64) -> f64 {
        self.frequencies()
            .into_iter()
            .filter(|k| k.unsigned_abs() >= m)
            .map(|k| self.r(k).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖r‖`, the total energy.
    pub fn norm_r(&self) -> f64 {
        self.tail_energy(0)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.p.values().chain(self.q.values()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Potential of the adjoint operator: `P*(m) = conj q(-m)`, `Q*(m) = conj p(-m)`.
    pub fn adjoint(&self) -> Self {
        Self {
            p: self.q.iter().map(|(&m, c)| (-m, c.conj())).collect(),
            q: self.p.iter().map(|(&m, c)| (-m, c.conj())).collect(),
        }
    }

    /// `P -> cP`, `Q -> Q/c`; the operator stays similar to the original.
    pub fn scaled(&self, c: Complex64) -> Self {
        assert!(c.norm() > 0.0, "scale must be nonzero");
        Self {
            p: self.p.iter().map(|(&m, &v)| (m, v * c)).collect(),
            q: self.q.iter().map(|(&m, &v)| (m, v / c)).collect(),
        }
    }

    /// Least-squares fit of `q(m) = t conj p(-m)`; returns `(t, max misfit)`.
    fn fit_t(&self) -> Option<(f64, f64)> {
        let ks = self.frequencies();
        let w = |m: i64| self.p(-m).conj();
        let den: f64 = ks.iter().map(|&m| w(m).norm_sqr()).sum();
        if den == 0.0 {
            return None;
        }
        let num: f64 = ks.iter().map(|&m| (w(m).conj() * self.q(m)).re).sum();
        let t = num / den;
        let misfit = ks.iter().map(|&m| (self.q(m) - w(m) * t).norm()).fold(0.0, f64::max);
        Some((t, misfit))
    }

    pub fn classify(&self, tolerance: f64) -> PotentialClass {
        assert!(tolerance > 0.0, "tolerance must be positive");
        if self.is_zero() {
            return PotentialClass::Symmetric;
        }
        let scale = self.max_coefficient();
        match self.fit_t() {
            Some((t, misfit)) if t != 0.0 && misfit <= tolerance * scale => {
                if (t - 1.0).abs() <= tolerance {
                    PotentialClass::Symmetric
                } else if (t + 1.0).abs() <= tolerance {
                    PotentialClass::SkewSymmetric
                } else {
                    PotentialClass::Xt(t)
                }
            }
            _ => PotentialClass::General,
        }
    }

    /// Reads a JSON potential config.
    pub fn from_json_str(s: &str) -> Result<Self, PotentialError> {
        let cfg: PotentialConfig = serde_json::from_str(s)?;
        cfg.build()
    }

    pub fn from_json_file(path: &Path) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PotentialError::Io { path: path.display().to_string(), source })?;
        Self::from_json_str(&text)
    }

    /// `X_t` potential from a file of `P` coefficients, either a bare
    /// `[[m, re, im], ...]` array or `{"p": [...]}`.
    pub fn xt_from_json_file(path: &Path, t: f64) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PotentialError::Io { path: path.display().to_string(), source })?;
        let p = match serde_json::from_str::<PCoefficients>(&text)? {
            PCoefficients::Bare(p) | PCoefficients::Keyed { p } => p,
        };
        make_xt_potential(triples(&p), t)
    }

    /// Coefficients from `N` uniform samples of `P` and `Q` on `[0, π)`.
    ///
    /// `p(2j)` is the `j`-th DFT coefficient divided by `N`, for `j` in
    /// `(-N/2, N/2]`. Frequencies with `|m| > cutoff` and coefficients below
    /// `1e-14` of the largest one are discarded.
    pub fn from_samples(p: &[Complex64], q: &[Complex64], cutoff: u64) -> Result<Self, PotentialError> {
        if p.is_empty() || p.len() != q.len() {
            return Err(PotentialError::BadSamples);
        }
        let n = p.len();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let analyse = |samples: &[Complex64]| {
            let mut buf = samples.to_vec();
            fft.process(&mut buf);
            buf.into_iter()
                .enumerate()
                .map(|(k, c)| {
                    let j = if k > n / 2 { k as i64 - n as i64 } else { k as i64 };
                    (2 * j, c / n as f64)
                })
                .filter(|(m, _)| m.unsigned_abs() <= cutoff)
                .collect::<Vec<_>>()
        };
        let (cp, cq) = (analyse(p), analyse(q));
        let peak = cp.iter().chain(&cq).map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let keep = |v: Vec<(i64, Complex64)>| v.into_iter().filter(move |(_, c)| c.norm() > 1e-14 * peak);
        Self::from_coefficients(keep(cp), keep(cq))
    }
}

/// `P = a e^{2ix} + b e^{-2ix}`, `Q = A e^{2ix} + B e^{-2ix}`.
pub fn make_trig_potential(a: Complex64, b: Complex64, big_a: Complex64, big_b: Complex64) -> FourierPotential {
    FourierPotential::from_coefficients([(2, a), (-2, b)], [(2, big_a), (-2, big_b)])
        .expect("fixed even frequencies")
}

/// Potential in `X_t`: `q(m) = t conj p(-m)`.
pub fn make_xt_potential(
    p: impl IntoIterator<Item = (i64, Complex64)>,
    t: f64,
) -> Result<FourierPotential, PotentialError> {
    if t == 0.0 || !t.is_finite() {
        return Err(PotentialError::BadT(t));
    }
    let p = checked(p)?;
    let q = p.iter().map(|(&m, c)| (-m, c.conj() * t)).collect();
    Ok(FourierPotential { p, q })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "tag", content = "t")]
pub enum PotentialClass {
    /// `Q = t conj P` for a real `t` other than ±1.
    Xt(f64),
    Symmetric,
    SkewSymmetric,
    General,
}

impl PotentialClass {
    pub fn t_value(&self) -> Option<f64> {
        match *self {
            Self::Xt(t) => Some(t),
            Self::Symmetric => Some(1.0),
            Self::SkewSymmetric => Some(-1.0),
            Self::General => None,
        }
    }
}

impl fmt::Display for PotentialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Xt(t) => write!(f, "X_t (t = {t})"),
            Self::Symmetric => f.write_str("symmetric (X_1)"),
            Self::SkewSymmetric => f.write_str("skew-symmetric (X_-1)"),
            Self::General => f.write_str("general"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrigSpec {
    #[serde(default)]
    a: [f64; 2],
    #[serde(default)]
    b: [f64; 2],
    #[serde(default, rename = "A")]
    big_a: [f64; 2],
    #[serde(default, rename = "B")]
    big_b: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct XtSpec {
    t: f64,
    p: Vec<(i64, f64, f64)>,
}

/// On-disk potential description.
#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialConfig {
    Trig {
        trig: TrigSpec,
    },
    Xt {
        xt: XtSpec,
    },
    Coefficients {
        p: Vec<(i64, f64, f64)>,
        #[serde(default)]
        q: Vec<(i64, f64, f64)>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PCoefficients {
    Bare(Vec<(i64, f64, f64)>),
    Keyed { p: Vec<(i64, f64, f64)> },
}

fn triples(v: &[(i64, f64, f64)]) -> impl Iterator<Item = (i64, Complex64)> + '_ {
    v.iter().map(|&(m, re, im)| (m, Complex64::new(re, im)))
}

impl PotentialConfig {
    fn build(self) -> Result<FourierPotential, PotentialError> {
        let c = |x: [f64; 2]| Complex64::new(x[0], x[1]);
        match self {
            Self::Trig { trig } => Ok(make_trig_potential(c(trig.a), c(trig.b), c(trig.big_a), c(trig.big_b))),
            Self::Xt { xt } => make_xt_potential(triples(&xt.p), xt.t),
            Self::Coefficients { p, q } => FourierPotential::from_coefficients(triples(&p), triples(&q)),
        }
    }
}
