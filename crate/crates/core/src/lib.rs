//! Multivariate tail risk measures for generalized skew-elliptical laws.
//!
//! A GSE vector `Y = μ + R·Z` has standardized density
//! `2 c_n g_n(½|z|²) H(γᵀz)`. For a tail event `{Z > λ}` this crate computes
//! the conditional mean (MTCE), the conditional covariance (MTCov), its
//! correlation form (MTCorr) and, in one dimension, the tail variance (TV).

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimate;
pub mod generators;
pub mod oracle;
pub mod quadrature;
pub mod risk_measures;
pub mod skewing;
pub mod special;
pub mod tail_engine;

pub use error::{Error, Result};
pub use estimate::Estimate;
