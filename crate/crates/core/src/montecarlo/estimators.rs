use super::{map_paths, simulate_path, Barriers, MCEstimate, PathRecord, PathSimConfig};
use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::optimal_stopping::{CaseTag, Side, StoppingSolution};
use crate::swap_contracts::{ContractSide, ContractSpec};

/// Exercise rule fed to the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Exercise at the first `X_t >= B`.
    UpCross(f64),
    /// Exercise at the first `X_t < A`. `A = 0` means exercising just
    /// before a creeping default (the `A -> 0+` limit).
    DownCross(f64),
    Never,
}

impl Policy {
    /// The threshold rule of an analytic solution, with creeping exercise
    /// for `A* = 0` and no exercise for the `Never` case.
    pub fn from_solution(sol: &StoppingSolution) -> Self {
        match (sol.side, sol.case_tag) {
            (_, CaseTag::Never) => Policy::Never,
            (Side::BuyerUpCross, _) => Policy::UpCross(sol.threshold),
            (Side::SellerDownCross, _) => Policy::DownCross(sol.threshold),
        }
    }
}

/// Which cash flows a policy evaluation discounts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    /// The full contract: `V` for callable, `U` for putable.
    Contract,
    /// Only what exercising changes, i.e. the swaption leg.
    OptionLeg,
}

fn disc(r: f64, t: f64) -> f64 {
    if t.is_finite() {
        (-r * t).exp()
    } else {
        0.0
    }
}

/// `int_a^b exp(-r t) dt`.
fn annuity(r: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else {
        (disc(r, a) - disc(r, b)) / r
    }
}

/// Discounted cash flow of `spec` on one path with default time `theta`
/// (`inf` if none) and exercise time `tau`, which must not exceed `theta`;
/// `tau == theta` stands for exercising just before default. Flows stop at
/// `spec.maturity` when set.
pub fn path_cash_flow(spec: &ContractSpec, r: f64, leg: Leg, theta: f64, tau: Option<f64>) -> f64 {
    let maturity = spec.maturity.unwrap_or(f64::INFINITY);
    let end = theta.min(maturity);
    let defaulted = theta.is_finite() && theta <= maturity;
    let tau = tau.filter(|&s| s < maturity && s <= theta);
    let dtheta = if defaulted { disc(r, theta) } else { 0.0 };
    // Flows to the protection buyer excluding the fee.
    let buyer = match (leg, tau) {
        (Leg::Contract, None) => -spec.p * annuity(r, 0.0, end) + spec.alpha * dtheta,
        (Leg::Contract, Some(s)) => -spec.p * annuity(r, 0.0, s) - spec.p_hat * annuity(r, s, end) + spec.alpha_hat * dtheta,
        (Leg::OptionLeg, None) => 0.0,
        (Leg::OptionLeg, Some(s)) => (spec.p - spec.p_hat) * annuity(r, s, end) - (spec.alpha - spec.alpha_hat) * dtheta,
    };
    let fee = tau.map_or(0.0, |s| spec.gamma * disc(r, s));
    match spec.side {
        ContractSide::Callable => buyer - fee,
        ContractSide::Putable => -buyer - fee,
    }
}

enum Resolved {
    Up(usize),
    Down(usize),
    Creep,
    Never,
}

fn exercise_time(rec: &PathRecord, policy: &Resolved) -> Option<f64> {
    let theta = rec.theta_or_inf();
    match *policy {
        Resolved::Never => None,
        Resolved::Up(i) => rec.up_hits[i].filter(|&s| s < theta),
        Resolved::Down(i) => rec.down_hits[i].filter(|h| h.creep || h.level > 0.0).map(|h| h.time.min(theta)),
        Resolved::Creep => rec.theta.filter(|_| rec.creep),
    }
}

fn truncation_check(cfg: &PathSimConfig, r: f64, truncated_fraction: f64) -> Result<()> {
    let bound = truncated_fraction * (-r * cfg.horizon).exp();
    if bound > cfg.truncation_tolerance {
        return Err(Error::HorizonTooShort { bound, tolerance: cfg.truncation_tolerance });
    }
    Ok(())
}

/// Estimates the values of several policies on common paths, so that
/// differences between them are not blurred by independent noise.
pub fn evaluate_policies(
    model: &LevyModel,
    x: f64,
    spec: &ContractSpec,
    policies: &[Policy],
    leg: Leg,
    cfg: &PathSimConfig,
) -> Result<Vec<MCEstimate>> {
    cfg.validate()?;
    spec.validate()?;
    let r = model.rate();
    cfg.check_horizon(r)?;
    let mut barriers = Barriers::default();
    let resolved: Vec<Resolved> = policies
        .iter()
        .map(|p| match *p {
            Policy::UpCross(b) => {
                barriers.up.push(b);
                Resolved::Up(barriers.up.len() - 1)
            }
            Policy::DownCross(a) if a > 0.0 => {
                barriers.down.push(a);
                Resolved::Down(barriers.down.len() - 1)
            }
            Policy::DownCross(_) => Resolved::Creep,
            Policy::Never => Resolved::Never,
        })
        .collect();
    let per_path: Vec<(bool, Vec<f64>)> = map_paths(cfg.n_paths, cfg.seed, |_, rng| {
        let rec = simulate_path(model, x, cfg, &barriers, rng);
        let theta = rec.theta_or_inf();
        let flows = resolved.iter().map(|p| path_cash_flow(spec, r, leg, theta, exercise_time(&rec, p))).collect();
        (rec.theta.is_none(), flows)
    });
    let alive = per_path.iter().filter(|(a, _)| *a).count() as f64 / cfg.n_paths as f64;
    truncation_check(cfg, r, alive)?;
    Ok((0..policies.len())
        .map(|k| {
            let column: Vec<f64> = per_path.iter().map(|(_, v)| v[k]).collect();
            MCEstimate::from_samples(&column, alive)
        })
        .collect())
}

/// Value of one exercise policy; see [`evaluate_policies`].
pub fn evaluate_policy(
    model: &LevyModel,
    x: f64,
    spec: &ContractSpec,
    policy: Policy,
    leg: Leg,
    cfg: &PathSimConfig,
) -> Result<MCEstimate> {
    Ok(evaluate_policies(model, x, spec, &[policy], leg, cfg)?.remove(0))
}

/// One simulated path under a single policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFlow {
    pub path_id: u64,
    pub theta: Option<f64>,
    pub x_at_theta: f64,
    pub creep: bool,
    pub discounted_payoff: f64,
}

/// Per-path detail behind [`evaluate_policy`], on the same paths.
pub fn policy_path_flows(
    model: &LevyModel,
    x: f64,
    spec: &ContractSpec,
    policy: Policy,
    leg: Leg,
    cfg: &PathSimConfig,
) -> Result<Vec<PathFlow>> {
    cfg.validate()?;
    spec.validate()?;
    let r = model.rate();
    cfg.check_horizon(r)?;
    let mut barriers = Barriers::default();
    let resolved = match policy {
        Policy::UpCross(b) => {
            barriers.up.push(b);
            Resolved::Up(0)
        }
        Policy::DownCross(a) if a > 0.0 => {
            barriers.down.push(a);
            Resolved::Down(0)
        }
        Policy::DownCross(_) => Resolved::Creep,
        Policy::Never => Resolved::Never,
    };
    Ok(map_paths(cfg.n_paths, cfg.seed, |id, rng| {
        let rec = simulate_path(model, x, cfg, &barriers, rng);
        let payoff = path_cash_flow(spec, r, leg, rec.theta_or_inf(), exercise_time(&rec, &resolved));
        PathFlow { path_id: id, theta: rec.theta, x_at_theta: rec.x_at_theta, creep: rec.creep, discounted_payoff: payoff }
    }))
}

/// Default-time functionals estimated from one batch of paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultFunctionals {
    /// `E[exp(-r theta)]`.
    pub zeta: MCEstimate,
    /// `E[exp(-r theta) 1{X_theta < 0}]`, the jump-default part.
    pub overshoot: MCEstimate,
    /// `E[exp(-r theta) 1{X_theta = 0}]`, the creeping part.
    pub creep: MCEstimate,
    /// Quantities at a finite horizon `T`, when requested.
    pub horizon: Option<HorizonFunctionals>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonFunctionals {
    pub maturity: f64,
    /// `E[exp(-r theta) 1{theta <= T}]`.
    pub zeta_t: MCEstimate,
    /// `P(theta > T)`.
    pub survival: MCEstimate,
    /// `E[1{theta >= T} int_T^theta exp(-r t) dt]`.
    pub premium_tail: MCEstimate,
    /// `E[1{theta >= T} exp(-r T)]`.
    pub fee_tail: MCEstimate,
    /// `E[1{theta >= T} exp(-r theta)]`.
    pub protection_tail: MCEstimate,
}

/// Estimates the default functionals at `x`, plus the horizon-`T` terms
/// when `maturity` is given.
pub fn estimate_default_functionals(
    model: &LevyModel,
    x: f64,
    cfg: &PathSimConfig,
    maturity: Option<f64>,
) -> Result<DefaultFunctionals> {
    cfg.validate()?;
    let r = model.rate();
    cfg.check_horizon(r)?;
    if let Some(t) = maturity {
        if !(t > 0.0) {
            return Err(Error::NegativeParameter { name: "maturity", value: t });
        }
    }
    let barriers = Barriers::default();
    let rows: Vec<[f64; 9]> = map_paths(cfg.n_paths, cfg.seed, |_, rng| {
        let rec = simulate_path(model, x, cfg, &barriers, rng);
        let theta = rec.theta_or_inf();
        let d = disc(r, theta);
        let jump = if rec.theta.is_some() && !rec.creep { d } else { 0.0 };
        let creep = if rec.creep { d } else { 0.0 };
        let mut row = [d, jump, creep, 0.0, 0.0, 0.0, 0.0, 0.0, if rec.theta.is_none() { 1.0 } else { 0.0 }];
        if let Some(t) = maturity {
            let late = theta >= t;
            row[3] = if theta <= t { d } else { 0.0 };
            row[4] = if theta > t { 1.0 } else { 0.0 };
            if late {
                row[5] = annuity(r, t, theta);
                row[6] = disc(r, t);
                row[7] = d;
            }
        }
        row
    });
    let alive = rows.iter().map(|row| row[8]).sum::<f64>() / cfg.n_paths as f64;
    truncation_check(cfg, r, alive)?;
    let col = |k: usize| {
        let v: Vec<f64> = rows.iter().map(|row| row[k]).collect();
        MCEstimate::from_samples(&v, alive)
    };
    Ok(DefaultFunctionals {
        zeta: col(0),
        overshoot: col(1),
        creep: col(2),
        horizon: maturity.map(|t| HorizonFunctionals {
            maturity: t,
            zeta_t: col(3),
            survival: col(4),
            premium_tail: col(5),
            fee_tail: col(6),
            protection_tail: col(7),
        }),
    })
}

/// `Gamma(x; A) = E[exp(-r tau_A^-) 1{X(tau_A^-) < 0}]`; `A = 0` gives the
/// jump-default part of `zeta`.
pub fn estimate_gamma(model: &LevyModel, x: f64, a: f64, cfg: &PathSimConfig) -> Result<MCEstimate> {
    if a <= 0.0 {
        return Ok(estimate_default_functionals(model, x, cfg, None)?.overshoot);
    }
    cfg.validate()?;
    let r = model.rate();
    cfg.check_horizon(r)?;
    let barriers = Barriers { up: vec![], down: vec![a] };
    let rows: Vec<(bool, f64)> = map_paths(cfg.n_paths, cfg.seed, |_, rng| {
        let rec = simulate_path(model, x, cfg, &barriers, rng);
        let v = match rec.down_hits[0] {
            Some(h) if h.level < 0.0 => disc(r, h.time),
            _ => 0.0,
        };
        (rec.theta.is_none(), v)
    });
    let alive = rows.iter().filter(|(a, _)| *a).count() as f64 / cfg.n_paths as f64;
    truncation_check(cfg, r, alive)?;
    let v: Vec<f64> = rows.iter().map(|(_, v)| *v).collect();
    Ok(MCEstimate::from_samples(&v, alive))
}
