//! Simulation and moment-based estimation for ARCH(1) models whose
//! conditional variance is driven by an exogenous liquidity process.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fgn;
pub mod liquidity;
pub mod montecarlo;
pub mod poisson;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
