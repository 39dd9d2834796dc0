//! Callable and putable step-up/step-down default swaps: contract values as
//! a vanilla CDS plus an American swaption, the put-call parity identities,
//! and the fair premium.

use crate::cds_pricing::{perpetual_cds_value, SwitchTriplet};
use crate::error::{Error, Result};
use crate::optimal_stopping::{solve_a_star, solve_b_star, Side, StoppingSolution};
use crate::scale_functions::ScaleFunction;

/// Who holds the switching right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractSide {
    /// The protection buyer may switch.
    Callable,
    /// The protection seller may switch.
    Putable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Terms unchanged by exercise.
    Vanilla,
    /// Premium and protection both drop to zero.
    Cancellation,
    StepDown,
    StepUp,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Vanilla => "vanilla",
            Classification::Cancellation => "cancellation",
            Classification::StepDown => "step_down",
            Classification::StepUp => "step_up",
        })
    }
}

/// Terms of a switchable default swap on unit notional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractSpec {
    pub p: f64,
    pub p_hat: f64,
    pub alpha: f64,
    pub alpha_hat: f64,
    pub gamma: f64,
    pub side: ContractSide,
    /// `None` for a perpetual contract.
    pub maturity: Option<f64>,
}

impl ContractSpec {
    pub fn new(p: f64, p_hat: f64, alpha: f64, alpha_hat: f64, gamma: f64, side: ContractSide) -> Result<Self> {
        let spec = Self { p, p_hat, alpha, alpha_hat, gamma, side, maturity: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Post-exercise terms proportional to the initial ones: `p_hat = q p`,
    /// `alpha_hat = q alpha`.
    pub fn proportional(p: f64, alpha: f64, q: f64, gamma: f64, side: ContractSide) -> Result<Self> {
        Self::new(p, q * p, alpha, q * alpha, gamma, side)
    }

    pub fn with_maturity(mut self, maturity: Option<f64>) -> Result<Self> {
        self.maturity = maturity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("p", self.p), ("p_hat", self.p_hat), ("alpha_hat", self.alpha_hat), ("gamma", self.gamma)] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NegativeParameter { name, value });
            }
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::NegativeParameter { name: "alpha", value: self.alpha });
        }
        if let Some(t) = self.maturity {
            if !(t > 0.0) {
                return Err(Error::NegativeParameter { name: "maturity", value: t });
            }
        }
        if (self.p_hat - self.p) * (self.alpha_hat - self.alpha) < 0.0 {
            return Err(Error::MixedSpecification { p_check: self.p - self.p_hat, a_check: self.alpha - self.alpha_hat });
        }
        Ok(())
    }

    pub fn classification(&self) -> Classification {
        if self.p_hat == self.p && self.alpha_hat == self.alpha {
            Classification::Vanilla
        } else if self.p_hat == 0.0 && self.alpha_hat == 0.0 {
            Classification::Cancellation
        } else if self.p_hat <= self.p && self.alpha_hat <= self.alpha {
            Classification::StepDown
        } else {
            Classification::StepUp
        }
    }

    /// `(p - p_hat, alpha - alpha_hat, gamma)`, normalised.
    pub fn triplet(&self) -> Result<SwitchTriplet> {
        SwitchTriplet::new(self.p - self.p_hat, self.alpha - self.alpha_hat, self.gamma)
    }

    /// The spec with `(2p - p_hat, 2 alpha - alpha_hat)` and the other side,
    /// used by the parity identities.
    pub fn mirror(&self) -> Result<Self> {
        let premium = 2.0 * self.p - self.p_hat;
        let protection = 2.0 * self.alpha - self.alpha_hat;
        if premium < 0.0 || protection < 0.0 {
            return Err(Error::MirrorInadmissible { premium, protection });
        }
        let side = match self.side {
            ContractSide::Callable => ContractSide::Putable,
            ContractSide::Putable => ContractSide::Callable,
        };
        Ok(Self { p_hat: premium, alpha_hat: protection, side, ..*self })
    }

    /// Which stopping problem the option leg reduces to.
    pub fn stopping_side(&self) -> Side {
        let step_up = self.p_hat > self.p || self.alpha_hat > self.alpha;
        if (self.side == ContractSide::Callable) != step_up {
            Side::BuyerUpCross
        } else {
            Side::SellerDownCross
        }
    }
}

/// Solves the stopping problem behind a contract's option leg.
pub fn solve_option(sf: &ScaleFunction, spec: &ContractSpec) -> Result<StoppingSolution> {
    let trip = spec.triplet()?;
    match spec.stopping_side() {
        Side::BuyerUpCross => solve_b_star(sf, &trip),
        Side::SellerDownCross => solve_a_star(sf, &trip),
    }
}

/// A contract value split into its two legs.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractValue {
    pub total: f64,
    /// `C(x; p, alpha)` for callable, `-C(x; p, alpha)` for putable.
    pub cds_leg: f64,
    pub option_leg: f64,
    pub solution: StoppingSolution,
}

/// Value of a perpetual contract to the holder of the switching right's
/// side: `V` for callable (buyer's view), `U` for putable (seller's view).
pub fn contract_value(sf: &ScaleFunction, x: f64, spec: &ContractSpec) -> Result<ContractValue> {
    spec.validate()?;
    let solution = solve_option(sf, spec)?;
    let c = perpetual_cds_value(sf, x, spec.p, spec.alpha);
    let cds_leg = match spec.side {
        ContractSide::Callable => c,
        ContractSide::Putable => -c,
    };
    let option_leg = solution.value(x);
    Ok(ContractValue { total: cds_leg + option_leg, cds_leg, option_leg, solution })
}

/// `V(x; p, p_hat, alpha, alpha_hat, gamma)` of a callable contract.
pub fn value_callable(sf: &ScaleFunction, x: f64, spec: &ContractSpec) -> Result<f64> {
    let spec = ContractSpec { side: ContractSide::Callable, ..*spec };
    Ok(contract_value(sf, x, &spec)?.total)
}

/// `U(x; p, p_hat, alpha, alpha_hat, gamma)` of a putable contract.
pub fn value_putable(sf: &ScaleFunction, x: f64, spec: &ContractSpec) -> Result<f64> {
    let spec = ContractSpec { side: ContractSide::Putable, ..*spec };
    Ok(contract_value(sf, x, &spec)?.total)
}

/// Perpetual American swaption `v(x; kappa, a, K)` paying
/// `(C(X; kappa, a) - K)^+` at exercise before default. `kappa` and `a` must
/// share a sign.
pub fn swaption(sf: &ScaleFunction, x: f64, kappa: f64, a: f64, strike: f64) -> Result<f64> {
    if kappa <= 0.0 && a <= 0.0 {
        let trip = SwitchTriplet::new(-kappa, -a, strike)?;
        Ok(solve_b_star(sf, &trip)?.value(x))
    } else if kappa >= 0.0 && a >= 0.0 {
        let trip = SwitchTriplet::new(kappa, a, strike)?;
        Ok(solve_a_star(sf, &trip)?.value(x))
    } else {
        Err(Error::MixedSpecification { p_check: -kappa, a_check: -a })
    }
}

/// Residuals of the two parity identities
/// `V(spec) - U(mirror) = 2 C(x; p, alpha)` and
/// `V(spec) + U(mirror) = 2 v(x; p_hat - p, alpha_hat - alpha, gamma)`.
pub fn parity_check(sf: &ScaleFunction, x: f64, spec: &ContractSpec) -> Result<(f64, f64)> {
    let callable = ContractSpec { side: ContractSide::Callable, ..*spec };
    let mirror = callable.mirror()?;
    let v = value_callable(sf, x, &callable)?;
    let u = value_putable(sf, x, &mirror)?;
    let c = perpetual_cds_value(sf, x, spec.p, spec.alpha);
    let w = swaption(sf, x, spec.p_hat - spec.p, spec.alpha_hat - spec.alpha, spec.gamma)?;
    Ok(((v - u - 2.0 * c).abs(), (v + u - 2.0 * w).abs()))
}

/// How the post-exercise premium follows the trial premium during the
/// spread search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PremiumRule {
    /// `p_hat = q p`.
    Proportional(f64),
    /// `p_hat` held fixed.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadResult {
    pub p_star: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
    /// Contract value at `p_star`.
    pub residual: f64,
}

/// Premium `p*` making the contract worthless at inception. `template`
/// supplies everything except `p` and `p_hat`.
pub fn credit_spread(sf: &ScaleFunction, x: f64, template: &ContractSpec, rule: PremiumRule) -> Result<SpreadResult> {
    if x <= 0.0 {
        return Err(Error::DegenerateAtDefault { x });
    }
    let alpha = template.alpha;
    let zeta = sf.zeta(x);
    if zeta >= 1.0 - 1e-14 {
        return Err(Error::DegenerateAtDefault { x });
    }
    let value_at = |p: f64| -> Result<f64> {
        let p_hat = match rule {
            PremiumRule::Proportional(q) => q * p,
            PremiumRule::Fixed(ph) => ph,
        };
        let spec = ContractSpec { p, p_hat, ..*template };
        Ok(contract_value(sf, x, &spec)?.total)
    };
    let tol = 1e-10 * alpha;
    let cap = 10.0 * alpha * sf.rate() / (1.0 - zeta);
    let mut lo = 0.0;
    let f_lo = value_at(lo)?;
    if f_lo.abs() < tol {
        return Ok(SpreadResult { p_star: 0.0, iterations: 0, bracket: (0.0, 0.0), residual: f_lo });
    }
    let vanilla = alpha * sf.rate() * zeta / (1.0 - zeta);
    let mut hi = vanilla.max(cap * 1e-6);
    let mut f_hi = value_at(hi)?;
    while f_hi.signum() == f_lo.signum() && f_hi.abs() >= tol {
        if hi >= cap {
            return Err(Error::NoSignChange { cap });
        }
        hi = (2.0 * hi).min(cap);
        f_hi = value_at(hi)?;
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    let (mut p, mut f_p) = (hi, f_hi);
    while f_p.abs() >= tol && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = value_at(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        p = mid;
        f_p = f_mid;
    }
    Ok(SpreadResult { p_star: p, iterations, bracket, residual: f_p })
}
