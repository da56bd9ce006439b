//! Complex linear algebra kernels: dense matrices, LU solves, band LU and a
//! Hessenberg/QR eigensolver. Everything is generic over [`Real`], so the same
//! code runs in `f64` or in double-double ([`Extended`]).

pub mod banded;
pub mod eigen;
pub mod error;
pub mod lu;
pub mod matrix;
pub mod scalar;

pub use banded::{BandedLu, BandedMatrix};
pub use eigen::{eigen_decompose, schur_decompose, spectral_norm, EigenConfig, EigenResult, SchurForm};
pub use error::LinalgError;
pub use lu::{lu_factor, solve_linear, solve_residual, LuFactors};
pub use matrix::{dot, vec_norm, ComplexMatrix};
pub use scalar::{abs, abs2, cdiv, cone, cplx, cscale_inv, csqrt, czero, lift, lower, Extended, Real};
