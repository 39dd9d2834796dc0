//! Simulation oracle for the analytic results.
//!
//! Paths of `X_t = x + mu t + sigma B_t - (compound Poisson)` are built from
//! exact exponential jump epochs and Gaussian increments in between. Level
//! crossings between grid points are resolved by sampling the extrema of the
//! Brownian bridge, so first passages are exact in law; only the recorded
//! passage time is rounded up to the end of the (adaptive) step.
//!
//! Every path owns a counter-based random stream, so results depend only on
//! the seed and configuration, never on how paths are scheduled.

mod engine;
mod estimators;
mod path;

#[cfg(feature = "parallel")]
pub use engine::map_paths_parallel;
pub use engine::{map_paths, map_paths_sequential};
pub use estimators::{
    estimate_default_functionals, estimate_gamma, evaluate_policies, evaluate_policy, path_cash_flow, policy_path_flows,
    DefaultFunctionals, HorizonFunctionals, Leg, PathFlow, Policy,
};
pub use path::{simulate_first_passage, simulate_path, Barriers, DownHit, PathRecord};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Minimum `r * horizon` for perpetual expectations (discount tail `e^-20`).
pub const MIN_DISCOUNT_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PathSimConfig {
    pub n_paths: usize,
    /// Smallest Brownian step, used next to a barrier.
    pub dt: f64,
    /// Paths still alive at this time are treated as never defaulting.
    pub horizon: f64,
    pub seed: u64,
    /// Detect crossings between grid points through the bridge extrema.
    pub bridge_correction: bool,
    /// Largest acceptable `truncated_fraction * exp(-r horizon)`.
    pub truncation_tolerance: f64,
}

impl PathSimConfig {
    /// Defaults for rate `r`: `dt = 1e-3`, `horizon = 20 / r`, bridge on.
    pub fn new(n_paths: usize, seed: u64, r: f64) -> Self {
        Self { n_paths, dt: 1e-3, horizon: MIN_DISCOUNT_HORIZON / r, seed, bridge_correction: true, truncation_tolerance: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidConfig(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.truncation_tolerance > 0.0) {
            return Err(Error::InvalidConfig("truncation_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Checks that discounting beyond the horizon is negligible at rate `r`.
    pub(crate) fn check_horizon(&self, r: f64) -> Result<()> {
        if r * self.horizon < MIN_DISCOUNT_HORIZON * (1.0 - 1e-12) {
            return Err(Error::HorizonTooShort { bound: (-r * self.horizon).exp(), tolerance: (-MIN_DISCOUNT_HORIZON).exp() });
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    /// Share of paths still alive at the horizon.
    pub truncated_fraction: f64,
}

impl MCEstimate {
    /// Mean and standard error of `values`, summed in order.
    pub fn from_samples(values: &[f64], truncated_fraction: f64) -> Self {
        let n = values.len();
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let var = if n > 1 { compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64 } else { 0.0 };
        Self { mean, se: (var / n as f64).sqrt(), n, truncated_fraction }
    }

    /// Whether `value` lies within `k` standard errors (plus a tiny absolute
    /// slack for zero-variance estimates).
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.se + 1e-12
    }
}
