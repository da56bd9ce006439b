//! Spectral analysis of one-dimensional Dirac operators with periodic and
//! antiperiodic boundary conditions, truncated to a Fourier basis.
//!
//! The pipeline runs from a [`FourierPotential`] through the dense spectrum
//! ([`compute_spectrum`]), the reduced 2×2 problems near each lattice point
//! ([`reduction`]) and per-index diagnostics to a [`CriterionReport`] on
//! whether the root functions contain a Riesz basis.

pub mod basis;
pub mod criterion;
pub mod error;
pub mod potential;
pub mod reduction;
pub mod report;
pub mod spectral;

pub use basis::{assemble_matrix, Basis, Boundary, DiscretizationConfig, Precision};
pub use criterion::{analyze_criterion, CriterionConfig, CriterionReport, Verdict};
pub use error::{ConfigError, CoreError};
pub use potential::{make_trig_potential, make_xt_potential, FourierPotential, PotentialClass, PotentialError};
pub use reduction::{
    asymptotic_beta, beta_series, schur_reduction, solve_basic_equation, t_ratio, ExtReal, ReducedEval, Reducer,
    ReductionError, SchurReducer,
};
pub use spectral::{bari_markus_profile, compute_spectrum, overlap, riesz_projection, SpectralPair, SpectralRun};
