//! Fourier basis of the truncated operator and matrix assembly.
//!
//! Basis vectors are `a_j = (e^{-ijx}, 0)` and `b_j = (0, e^{ijx})` for `j` in
//! the lattice of the boundary condition. The free part is diagonal with
//! value `j` on both. The potential contributes `⟨a_j, v b_k⟩ = p(-j-k)` and
//! `⟨b_k, v a_j⟩ = q(j+k)`.
//!
//! Vectors are ordered in blocks labelled by `ℓ`: block `ℓ` holds `a_ℓ`
//! followed by `b_{-ℓ}`. A mode `m` then couples blocks whose labels differ by
//! `|m|`, so the matrix is banded with half-bandwidth `support_radius + 1`.

use std::fmt;
use std::str::FromStr;

use dirac_linalg::{BandedMatrix, ComplexMatrix, Real};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::potential::FourierPotential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Boundary {
    /// `y(π) = y(0)`, spectrum near even integers.
    #[serde(rename = "per+")]
    Periodic,
    /// `y(π) = -y(0)`, spectrum near odd integers.
    #[serde(rename = "per-")]
    Antiperiodic,
}

impl Boundary {
    pub fn parity(self) -> i64 {
        match self {
            Self::Periodic => 0,
            Self::Antiperiodic => 1,
        }
    }

    pub fn admits(self, n: i64) -> bool {
        n.rem_euclid(2) == self.parity()
    }

    /// Lattice points `n` with `lo <= |n| <= hi`, ascending.
    pub fn indices(self, lo: i64, hi: i64) -> Vec<i64> {
        (-hi..=hi).filter(|&n| self.admits(n) && n.abs() >= lo).collect()
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Periodic => "per+",
            Self::Antiperiodic => "per-",
        })
    }
}

impl FromStr for Boundary {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_lowercase().as_str() {
            "per+" | "periodic" => Ok(Self::Periodic),
            "per-" | "antiperiodic" => Ok(Self::Antiperiodic),
            other => Err(ConfigError::Invalid(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Arithmetic used for the dense eigensolver and the reduced 2x2 problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    /// Double-double, roughly 32 significant digits.
    #[default]
    Extended,
}

impl Precision {
    pub fn unit_roundoff(self) -> f64 {
        match self {
            Self::Double => f64::UNIT_ROUNDOFF,
            Self::Extended => dirac_linalg::Extended::UNIT_ROUNDOFF,
        }
    }
}

impl FromStr for Precision {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "double" => Ok(Self::Double),
            "extended" => Ok(Self::Extended),
            other => Err(ConfigError::Invalid(format!("unknown precision {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    /// Basis indices run over `|n| <= 2 * modes`.
    pub modes: usize,
    /// Results are reported for `|n| <= trusted_radius`.
    pub trusted_radius: usize,
    /// Eigenpair residual bound relative to the Frobenius norm.
    pub eig_tolerance: f64,
    pub precision: Precision,
    /// Trapezoid nodes on each projection contour.
    pub contour_nodes: usize,
    /// Eigenvalues closer than `split_factor · u · ‖H‖_F` count as one double eigenvalue.
    pub split_factor: f64,
    /// When set, projections for index `n` use only basis blocks within this
    /// distance of `±n` rather than the whole truncation.
    pub projection_halfwidth: Option<usize>,
}

impl DiscretizationConfig {
    /// Default window is half the mode cutoff.
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            trusted_radius: (modes / 2).max(1),
            eig_tolerance: 1e-10,
            precision: Precision::Extended,
            contour_nodes: 64,
            split_factor: 100.0,
            projection_halfwidth: None,
        }
    }

    pub fn with_radius(mut self, r: usize) -> Self {
        self.trusted_radius = r;
        self
    }

    pub fn with_precision(mut self, p: Precision) -> Self {
        self.precision = p;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes == 0 {
            return Err(ConfigError::Invalid("mode cutoff must be positive".into()));
        }
        if self.trusted_radius == 0 || self.trusted_radius > self.modes {
            return Err(ConfigError::Invalid(format!(
                "trusted radius {} must lie in 1..={} (the mode cutoff)",
                self.trusted_radius, self.modes
            )));
        }
        if !(self.eig_tolerance > 0.0) {
            return Err(ConfigError::Invalid("eigen tolerance must be positive".into()));
        }
        if self.contour_nodes < 8 {
            return Err(ConfigError::Invalid("at least 8 contour nodes are required".into()));
        }
        Ok(())
    }

    pub fn max_index(&self, bc: Boundary) -> i64 {
        let top = 2 * self.modes as i64;
        if bc.admits(top) {
            top
        } else {
            top - 1
        }
    }

    /// Indices of the trusted window.
    pub fn window(&self, bc: Boundary) -> Vec<i64> {
        bc.indices(0, self.trusted_radius as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    /// `(e^{-ijx}, 0)`
    Upper,
    /// `(0, e^{ijx})`
    Lower,
}

/// Ordered set of basis blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    bc: Boundary,
    labels: Vec<i64>,
}

impl Basis {
    /// All blocks with `|ℓ| <= 2M`.
    pub fn full(bc: Boundary, cfg: &DiscretizationConfig) -> Self {
        let top = cfg.max_index(bc);
        Self { bc, labels: bc.indices(0, top) }
    }

    /// Blocks within `halfwidth` of `n` or `-n`, clipped to the truncation.
    pub fn local(bc: Boundary, cfg: &DiscretizationConfig, n: i64, halfwidth: usize) -> Self {
        let top = cfg.max_index(bc);
        let w = halfwidth as i64;
        let labels = bc.indices(0, top).into_iter().filter(|&l| (l - n).abs() <= w || (l + n).abs() <= w).collect();
        Self { bc, labels }
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        2 * self.labels.len()
    }

    fn block(&self, label: i64) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// Position of `(e^{-ijx}, 0)`.
    pub fn upper(&self, j: i64) -> Option<usize> {
        self.block(j).map(|k| 2 * k)
    }

    /// Position of `(0, e^{ijx})`.
    pub fn lower(&self, j: i64) -> Option<usize> {
        self.block(-j).map(|k| 2 * k + 1)
    }

    /// Both positions of index `n`, upper first.
    pub fn pair_positions(&self, n: i64) -> Option<[usize; 2]> {
        Some([self.upper(n)?, self.lower(n)?])
    }

    pub fn vector(&self, pos: usize) -> (Component, i64) {
        let l = self.labels[pos / 2];
        if pos % 2 == 0 {
            (Component::Upper, l)
        } else {
            (Component::Lower, -l)
        }
    }

    pub fn half_bandwidth(v: &FourierPotential) -> usize {
        v.support_radius() as usize + 1
    }

    /// Matrix entry `⟨e_row, L e_col⟩`.
    pub fn entry(&self, v: &FourierPotential, row: usize, col: usize) -> num_complex::Complex64 {
        let (cr, jr) = self.vector(row);
        let (cc, jc) = self.vector(col);
        match (cr, cc) {
            _ if row == col => num_complex::Complex64::new(jr as f64, 0.0),
            (Component::Upper, Component::Lower) => v.p(-jr - jc),
            (Component::Lower, Component::Upper) => v.q(jr + jc),
            _ => num_complex::Complex64::new(0.0, 0.0),
        }
    }

    pub fn assemble_banded<T: Real>(&self, v: &FourierPotential) -> BandedMatrix<T> {
        let w = Self::half_bandwidth(v);
        let d = self.dim();
        let mut h = BandedMatrix::zeros(d, w, w);
        for i in 0..d {
            for j in h.row_span(i) {
                let e = self.entry(v, i, j);
                if e.re != 0.0 || e.im != 0.0 {
                    h.set(i, j, Complex::new(T::of(e.re), T::of(e.im)));
                }
            }
        }
        h
    }
}

/// Dense matrix of the truncated operator in the block ordering of [`Basis`].
pub fn assemble_matrix<T: Real>(v: &FourierPotential, bc: Boundary, cfg: &DiscretizationConfig) -> ComplexMatrix<T> {
    Basis::full(bc, cfg).assemble_banded::<T>(v).to_dense()
}
