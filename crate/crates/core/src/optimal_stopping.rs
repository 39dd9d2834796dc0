//! The buyer's up-crossing problem (threshold `B*`) and the seller's
//! down-crossing problem (threshold `A*`), with their value functions.
//!
//! Both problems are posed for a triplet in step-down orientation; step-up
//! contracts reach them through [`SwitchTriplet`] normalisation.

use crate::cds_pricing::{big_gamma, big_gamma_prime, payoff_g, payoff_g_at_zero, payoff_h, rho, SwitchTriplet};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::scale_functions::ScaleFunction;

/// Upper limit for the geometric bracket expansion of both solvers.
pub const BRACKET_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Exercise on the first passage above `B`.
    BuyerUpCross,
    /// Exercise on the first passage below `A`.
    SellerDownCross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    Interior,
    /// `B* = 0`: exercise at once.
    Immediate,
    /// Waiting for default is optimal; the option is worthless.
    Never,
    /// `A* = 0`: exercise as the process creeps down to zero.
    CreepAtZero,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::Interior => "interior",
            CaseTag::Immediate => "immediate",
            CaseTag::Never => "never",
            CaseTag::CreepAtZero => "creep_at_zero",
        };
        f.write_str(s)
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::BuyerUpCross => "buyer",
            Side::SellerDownCross => "seller",
        })
    }
}

/// Outcome of one of the two threshold problems.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingSolution {
    pub side: Side,
    /// `B*` or `A*`; `f64::INFINITY` for a buyer that never exercises and
    /// `0.0` for a seller that never exercises.
    pub threshold: f64,
    pub case_tag: CaseTag,
    pub trip: SwitchTriplet,
    /// Relative residual of the fit equation (zero for degenerate cases).
    pub fit_residual: f64,
    sf: ScaleFunction,
}

impl StoppingSolution {
    pub fn scale_function(&self) -> &ScaleFunction {
        &self.sf
    }

    /// Value of the optimally exercised option at `x`.
    pub fn value(&self, x: f64) -> f64 {
        match self.side {
            Side::BuyerUpCross => value_v(self, x),
            Side::SellerDownCross => value_u(self, x),
        }
    }
}

/// The two terms of `varrho(B)` after substituting `G = k W - h` with
/// `k = (p_check + a_check r) / Phi`: `k (Phi W - W')` and `(W'/W) h`.
/// The growing `exp(Phi B)` parts cancel in closed form, so both terms stay
/// bounded for large `B`.
fn varrho_terms(sf: &ScaleFunction, b: f64, trip: &SwitchTriplet) -> (f64, f64) {
    let phi = sf.phi();
    let k = (trip.p_check + trip.a_check * sf.rate()) / phi;
    let gap: f64 = sf.coefficients()[1..].iter().map(|&(z, c)| c * (phi - z) * (z * b).exp()).sum();
    (k * gap, sf.w_prime_scaled(b) / sf.w_scaled(b) * payoff_h(sf, b, trip))
}

/// `varrho(B) = (p_check + a_check r) W(B) - (W'(B)/W(B)) G(B)`, the
/// left derivative of `Delta_B` at `B`. Tends to `Phi (p_check/r - gamma)`.
pub fn varrho(sf: &ScaleFunction, b: f64, trip: &SwitchTriplet) -> f64 {
    let (a, c) = varrho_terms(sf, b, trip);
    a + c
}

/// `exp(-Phi B) varrho(B)`; same sign as `varrho(B)`.
pub fn varrho_scaled(sf: &ScaleFunction, b: f64, trip: &SwitchTriplet) -> f64 {
    (-sf.phi() * b).exp() * varrho(sf, b, trip)
}

/// `varrho(0+)`: `-inf` with a Brownian part, finite otherwise.
pub fn varrho_at_zero(sf: &ScaleFunction, trip: &SwitchTriplet) -> f64 {
    let model = sf.model();
    if model.sigma() > 0.0 {
        return f64::NEG_INFINITY;
    }
    let r = sf.rate();
    (trip.p_check - r * trip.gamma - (trip.a_check + trip.gamma) * model.levy_tail(0.0)) / model.drift()
}

/// Solves the buyer's problem.
pub fn solve_b_star(sf: &ScaleFunction, trip: &SwitchTriplet) -> Result<StoppingSolution> {
    let r = sf.rate();
    let make = |threshold, case_tag, fit_residual| StoppingSolution {
        side: Side::BuyerUpCross,
        threshold,
        case_tag,
        trip: *trip,
        fit_residual,
        sf: sf.clone(),
    };
    if trip.gamma >= trip.p_check / r {
        return Ok(make(f64::INFINITY, CaseTag::Never, 0.0));
    }
    if varrho_at_zero(sf, trip) >= 0.0 {
        return Ok(make(0.0, CaseTag::Immediate, 0.0));
    }
    let f = |b: f64| varrho(sf, b, trip);
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(Error::BracketExhausted { cap: BRACKET_CAP });
        }
    }
    let b = bisect(f, 0.0, hi, true);
    let (t1, t2) = varrho_terms(sf, b, trip);
    let residual = (t1 + t2).abs() / t1.abs().max(t2.abs());
    Ok(make(b, CaseTag::Interior, residual))
}

/// `v_B(x)`: value of exercising at the first passage above an arbitrary `B`.
pub fn value_v_at(sf: &ScaleFunction, trip: &SwitchTriplet, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= b {
        return payoff_h(sf, x, trip);
    }
    // W(x)/W(B) times the payoff at B; no exp(Phi B) growth to cancel
    let ratio = (sf.phi() * (x - b)).exp() * sf.w_scaled(x) / sf.w_scaled(b);
    ratio * payoff_h(sf, b, trip)
}

/// Optimal buyer value `v(x)`.
pub fn value_v(sol: &StoppingSolution, x: f64) -> f64 {
    debug_assert_eq!(sol.side, Side::BuyerUpCross);
    match sol.case_tag {
        CaseTag::Never => 0.0,
        _ => value_v_at(&sol.sf, &sol.trip, sol.threshold, x),
    }
}

/// `v'(x)` away from `0`; at `x = B*` the left derivative.
pub fn value_v_derivative(sol: &StoppingSolution, x: f64) -> f64 {
    let sf = &sol.sf;
    let trip = &sol.trip;
    if x <= 0.0 || sol.case_tag == CaseTag::Never {
        return 0.0;
    }
    if x > sol.threshold {
        return -(trip.p_check / sf.rate() + trip.a_check) * sf.zeta_prime(x);
    }
    let b = sol.threshold;
    let ratio = (sf.phi() * (x - b)).exp() * sf.w_prime_scaled(x) / sf.w_scaled(b);
    ratio * payoff_h(sf, b, trip)
}

/// `Delta_B(x) = v_B(x) - h(x)` on `(0, B)`, zero elsewhere.
pub fn delta_b(sf: &ScaleFunction, x: f64, b: f64, trip: &SwitchTriplet) -> f64 {
    if x <= 0.0 || x >= b {
        return 0.0;
    }
    let r = sf.rate();
    let z = sf.z(x);
    let ratio = sf.w_scaled(x) / sf.w_scaled(b) * (sf.phi() * (x - b)).exp();
    let gb = trip.p_check / r * (sf.z(b) - 1.0) + trip.a_check * sf.z(b) + trip.gamma;
    trip.p_check / r * (z - 1.0) + trip.a_check * z - ratio * gb + trip.gamma
}

/// Solves the seller's problem.
pub fn solve_a_star(sf: &ScaleFunction, trip: &SwitchTriplet) -> Result<StoppingSolution> {
    let r = sf.rate();
    let make = |threshold, case_tag, fit_residual| StoppingSolution {
        side: Side::SellerDownCross,
        threshold,
        case_tag,
        trip: *trip,
        fit_residual,
        sf: sf.clone(),
    };
    if payoff_g_at_zero(sf, trip) <= 0.0 {
        return Ok(make(0.0, CaseTag::Never, 0.0));
    }
    let excess = trip.a_check - trip.gamma;
    let target = trip.gamma * r + trip.p_check;
    if excess * rho(sf, 0.0) <= target {
        if sf.model().sigma() == 0.0 {
            return Err(Error::InconsistentBoundedVariation);
        }
        return Ok(make(0.0, CaseTag::CreepAtZero, 0.0));
    }
    let f = |a: f64| excess * rho(sf, a) - target;
    let phases = sf.model().active_phases();
    let a = if phases.len() == 1 {
        let (eta, phi) = (phases[0].rate, sf.phi());
        let lead = sf.model().jump_rate() * phases[0].weight * phi / (eta + phi);
        ((lead * excess / target).ln() / eta).max(0.0)
    } else {
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > BRACKET_CAP {
                return Err(Error::BracketExhausted { cap: BRACKET_CAP });
            }
        }
        bisect(f, 0.0, hi, false)
    };
    let residual = f(a).abs() / target;
    Ok(make(a, CaseTag::Interior, residual))
}

/// `Delta_A(x) = (gamma + p_check/r)(1 - zeta(x - A)) - (a_check - gamma) Gamma(x; A)`
/// for `x > A`, zero otherwise.
pub fn delta_a(sf: &ScaleFunction, x: f64, a: f64, trip: &SwitchTriplet) -> f64 {
    if x <= a {
        return 0.0;
    }
    let r = sf.rate();
    (trip.gamma + trip.p_check / r) * (1.0 - sf.zeta(x - a)) - (trip.a_check - trip.gamma) * big_gamma(sf, x, a)
}

/// `d/dx Delta_A(x)` for `x > A` (right derivative at `A`).
pub fn delta_a_prime(sf: &ScaleFunction, x: f64, a: f64, trip: &SwitchTriplet) -> f64 {
    if x < a {
        return 0.0;
    }
    let r = sf.rate();
    -(trip.gamma + trip.p_check / r) * sf.zeta_prime(x - a) - (trip.a_check - trip.gamma) * big_gamma_prime(sf, x, a)
}

/// `u_A(x)`: value of exercising at the first passage below `A`; `A = 0`
/// means exercising on a creeping approach to zero.
pub fn value_u_at(sf: &ScaleFunction, trip: &SwitchTriplet, a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if a <= 0.0 {
        return (trip.a_check - trip.gamma) * (sf.zeta(x) - big_gamma(sf, x, 0.0));
    }
    payoff_g(sf, x, trip) + delta_a(sf, x, a, trip)
}

/// Optimal seller value `u(x)`.
pub fn value_u(sol: &StoppingSolution, x: f64) -> f64 {
    debug_assert_eq!(sol.side, Side::SellerDownCross);
    match sol.case_tag {
        CaseTag::Never => 0.0,
        _ => value_u_at(&sol.sf, &sol.trip, sol.threshold, x),
    }
}
