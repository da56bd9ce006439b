use dirac_linalg::LinalgError;
use thiserror::Error;

use crate::potential::PotentialError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reduction(#[from] crate::reduction::ReductionError),
    #[error("index {n} has no localized pair in this run")]
    NotLocalized { n: i64 },
    #[error("{0}")]
    Insufficient(String),
}
