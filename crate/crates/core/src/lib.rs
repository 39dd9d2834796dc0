//! Pricing of perpetual callable/putable step-up and step-down default swaps
//! under a spectrally negative Lévy structural credit model.
//!
//! The analytic side builds the r-scale function of a Brownian motion with
//! hyperexponential downward jumps as an exponential sum, solves the two
//! optimal stopping problems behind the embedded switching option, and
//! assembles contract values and credit spreads. The [`montecarlo`] module is
//! an independent first-passage simulator used to check every analytic
//! quantity.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cds_pricing;
pub mod error;
pub mod finite_maturity;
pub mod levy_model;
pub mod montecarlo;
pub mod numeric;
pub mod optimal_stopping;
pub mod scale_functions;
pub mod swap_contracts;

pub use error::{Error, Result};
pub use levy_model::{FreeParameter, LevyModel, Phase, RootSet};
pub use scale_functions::ScaleFunction;
