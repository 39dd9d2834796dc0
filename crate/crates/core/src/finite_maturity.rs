//! Finite-maturity contracts through their perpetual counterparts: error
//! bounds around the perpetual value, the short-maturity level `C*`, and
//! the boundary endpoints as the maturity goes to zero or infinity.

use crate::cds_pricing::SwitchTriplet;
use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::montecarlo::{
    estimate_default_functionals, evaluate_policy, HorizonFunctionals, Leg, MCEstimate, PathSimConfig, Policy,
};
use crate::numeric::bisect;
use crate::optimal_stopping::{solve_a_star, solve_b_star, value_u, value_v, StoppingSolution};
use crate::scale_functions::ScaleFunction;
use crate::swap_contracts::ContractSpec;

/// Bracket `[lower, upper]` for a finite-maturity option value around the
/// perpetual-based approximation `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteApprox {
    pub maturity: f64,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    /// Standard errors of the three bounds; each is a sum of the errors of
    /// its simulated terms, so it never understates the joint error.
    pub center_se: f64,
    pub lower_se: f64,
    pub upper_se: f64,
    /// Unit-coefficient correction expectations behind the bounds.
    pub terms: HorizonFunctionals,
}

impl FiniteApprox {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Whether `value` lies in the bracket once each bound is widened by `k`
    /// of its standard errors and `value` by `k` of `value_se`.
    pub fn contains(&self, value: f64, value_se: f64, k: f64) -> bool {
        value + k * value_se >= self.lower - k * self.lower_se && value - k * value_se <= self.upper + k * self.upper_se
    }
}

fn horizon_terms(model: &LevyModel, x: f64, maturity: f64, cfg: &PathSimConfig) -> Result<HorizonFunctionals> {
    if !(maturity > 0.0) {
        return Err(Error::NegativeParameter { name: "maturity", value: maturity });
    }
    let f = estimate_default_functionals(model, x, cfg, Some(maturity))?;
    Ok(f.horizon.expect("maturity was given"))
}

/// Bracket for the buyer's finite-maturity option value. The lower bound is
/// the approximation itself.
pub fn approx_v_bar(
    sf: &ScaleFunction,
    x: f64,
    maturity: f64,
    trip: &SwitchTriplet,
    cfg: &PathSimConfig,
) -> Result<FiniteApprox> {
    let sol = solve_b_star(sf, trip)?;
    let terms = horizon_terms(sf.model(), x, maturity, cfg)?;
    let center = value_v(&sol, x) - trip.p_check * terms.premium_tail.mean;
    let center_se = trip.p_check * terms.premium_tail.se;
    let upper = center + trip.gamma * terms.fee_tail.mean + trip.a_check * terms.protection_tail.mean;
    let upper_se = center_se + trip.gamma * terms.fee_tail.se + trip.a_check * terms.protection_tail.se;
    Ok(FiniteApprox { maturity, center, lower: center, upper, center_se, lower_se: center_se, upper_se, terms })
}

/// Bracket for the seller's finite-maturity option value.
pub fn approx_u_bar(
    sf: &ScaleFunction,
    x: f64,
    maturity: f64,
    trip: &SwitchTriplet,
    cfg: &PathSimConfig,
) -> Result<FiniteApprox> {
    let sol = solve_a_star(sf, trip)?;
    let terms = horizon_terms(sf.model(), x, maturity, cfg)?;
    let u = value_u(&sol, x);
    let center = u + trip.p_check * terms.premium_tail.mean;
    let center_se = trip.p_check * terms.premium_tail.se;
    let lower = u - trip.a_check * terms.protection_tail.mean;
    let lower_se = trip.a_check * terms.protection_tail.se;
    let upper = center + trip.gamma * terms.fee_tail.mean;
    let upper_se = center_se + trip.gamma * terms.fee_tail.se;
    Ok(FiniteApprox { maturity, center, lower, upper, center_se, lower_se, upper_se, terms })
}

/// Level `C*` solving `p_check = a_check Pi(C*, inf)`, where the premium
/// saved over a short remaining life balances the expected protection lost
/// to an immediate jump default; zero when no such level exists.
pub fn solve_c_star(model: &LevyModel, trip: &SwitchTriplet) -> f64 {
    if !model.has_jumps() || trip.a_check <= 0.0 {
        return 0.0;
    }
    if trip.p_check <= 0.0 {
        return f64::INFINITY;
    }
    let target = trip.p_check / trip.a_check;
    if target >= model.levy_tail(0.0) {
        return 0.0;
    }
    let phases = model.active_phases();
    if phases.len() == 1 {
        let ph = phases[0];
        return ((model.jump_rate() * ph.weight / target).ln() / ph.rate).max(0.0);
    }
    let f = |c: f64| model.levy_tail(c) - target;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    bisect(f, 0.0, hi, false)
}

/// Limits of the finite-maturity exercise boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryReport {
    /// `B*(T)` as `T -> inf` and `T -> 0`.
    pub buyer_long: f64,
    pub buyer_short: f64,
    /// `A*(T)` as `T -> inf` and `T -> 0`.
    pub seller_long: f64,
    pub seller_short: f64,
    /// With a positive fee, exercising close to maturity never pays.
    pub never_near_maturity: bool,
}

impl BoundaryReport {
    /// Heuristic monotone boundaries `long + (short - long) exp(-T)`,
    /// `(buyer, seller)`. Only offered without a fee, when both endpoints are
    /// finite; nothing claims these curves are optimal.
    pub fn template(&self, maturity: f64) -> Option<(f64, f64)> {
        if self.never_near_maturity || !self.buyer_long.is_finite() || !self.buyer_short.is_finite() {
            return None;
        }
        let w = (-maturity).exp();
        Some((
            self.buyer_long + (self.buyer_short - self.buyer_long) * w,
            self.seller_long + (self.seller_short - self.seller_long) * w,
        ))
    }
}

pub fn boundary_report(buyer: &StoppingSolution, seller: &StoppingSolution, c_star: f64, gamma: f64) -> BoundaryReport {
    let positive_fee = gamma > 0.0;
    BoundaryReport {
        buyer_long: buyer.threshold,
        buyer_short: if positive_fee { f64::INFINITY } else { c_star },
        seller_long: seller.threshold,
        seller_short: if positive_fee { 0.0 } else { c_star },
        never_near_maturity: positive_fee,
    }
}

/// Limit of the finite-maturity spread as the maturity shrinks:
/// `alpha Pi(x, inf)`.
pub fn short_maturity_spread(model: &LevyModel, x: f64, alpha: f64) -> f64 {
    alpha * model.levy_tail(x)
}

/// Both candidate short-maturity limits `(alpha_hat Pi(x, inf), alpha Pi(x, inf))`
/// of a switchable contract without fee.
pub fn short_maturity_spread_candidates(model: &LevyModel, x: f64, spec: &ContractSpec) -> (f64, f64) {
    (short_maturity_spread(model, x, spec.alpha_hat), short_maturity_spread(model, x, spec.alpha))
}

/// Simulated option-leg value of `spec` with maturity `maturity` under a
/// constant-threshold policy stopped at maturity.
pub fn policy_value_finite(
    model: &LevyModel,
    x: f64,
    maturity: f64,
    policy: Policy,
    spec: &ContractSpec,
    cfg: &PathSimConfig,
) -> Result<MCEstimate> {
    let spec = spec.with_maturity(Some(maturity))?;
    evaluate_policy(model, x, &spec, policy, Leg::OptionLeg, cfg)
}
