use stepcds_core::cds_pricing::{payoff_g, payoff_h, perpetual_spread};
use stepcds_core::finite_maturity::{approx_u_bar, approx_v_bar, policy_value_finite};
use stepcds_core::montecarlo::{
    estimate_default_functionals, evaluate_policy, policy_path_flows, Leg, PathSimConfig, Policy, MIN_DISCOUNT_HORIZON,
};
use stepcds_core::optimal_stopping::{solve_a_star, solve_b_star, CaseTag, Side, StoppingSolution};
use stepcds_core::swap_contracts::{contract_value, credit_spread, parity_check, solve_option, ContractSide, ContractSpec};
use stepcds_core::{LevyModel, ScaleFunction};

use crate::config::{RunConfig, SweepVariable};
use crate::table::{Cell, Table};
use crate::CliError;

/// Everything a subcommand needs, built once from the config.
pub struct Context {
    pub cfg: RunConfig,
    pub model: LevyModel,
    pub sf: ScaleFunction,
    pub spec: ContractSpec,
    pub paths: PathSimConfig,
}

impl Context {
    pub fn new(cfg: RunConfig, test_profile: bool, seed: Option<u64>) -> Result<Self, CliError> {
        let model = cfg.model()?;
        let sf = ScaleFunction::new(&model)?;
        let spec = cfg.spec()?;
        let paths = cfg.path_config(test_profile, seed);
        Ok(Self { cfg, model, sf, spec, paths })
    }

    fn x(&self) -> f64 {
        self.cfg.contract.x
    }

    /// Path settings whose horizon covers `maturity` plus the discount tail.
    fn paths_for(&self, maturity: f64) -> PathSimConfig {
        let mut p = self.paths.clone();
        p.horizon = p.horizon.max(maturity + MIN_DISCOUNT_HORIZON / self.model.rate());
        p
    }
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::BuyerUpCross => "buyer_up_cross",
        Side::SellerDownCross => "seller_down_cross",
    }
}

fn contract_side_name(side: ContractSide) -> &'static str {
    match side {
        ContractSide::Callable => "callable",
        ContractSide::Putable => "putable",
    }
}

pub fn calibrate(ctx: &Context) -> Result<Table, CliError> {
    let m = &ctx.model;
    let mut t = Table::new(vec!["parameter", "value"]);
    let mut put = |k: String, v: Cell| t.push(vec![k.into(), v]);
    put("drift".into(), m.drift().into());
    put("sigma".into(), m.sigma().into());
    put("jump_rate".into(), m.jump_rate().into());
    put("r".into(), m.rate().into());
    for (i, ph) in m.phases().iter().enumerate() {
        put(format!("phase_{i}_weight"), ph.weight.into());
        put(format!("phase_{i}_rate"), ph.rate.into());
    }
    put("psi_at_1".into(), m.laplace_exponent(1.0)?.into());
    put("bounded_variation".into(), m.is_bounded_variation().into());
    put("phi_r".into(), ctx.sf.phi().into());
    for (i, (z, c)) in ctx.sf.coefficients().into_iter().enumerate().skip(1) {
        put(format!("root_{i}"), z.into());
        put(format!("coefficient_{i}"), c.into());
    }
    Ok(t)
}

pub fn scale_table(ctx: &Context) -> Result<Table, CliError> {
    let sf = &ctx.sf;
    let mut t = Table::new(vec!["x", "W", "W_prime", "Z", "zeta"]);
    for x in ctx.cfg.sweep.grid() {
        t.push(vec![x.into(), sf.w(x).into(), sf.w_prime(x).into(), sf.z(x).into(), sf.zeta(x).into()]);
    }
    Ok(t)
}

pub fn price(ctx: &Context) -> Result<Table, CliError> {
    let v = contract_value(&ctx.sf, ctx.x(), &ctx.spec)?;
    let mut t = Table::new(vec![
        "x",
        "side",
        "classification",
        "stopping_side",
        "case_tag",
        "threshold",
        "cds_leg",
        "option_leg",
        "total",
    ]);
    t.push(vec![
        ctx.x().into(),
        contract_side_name(ctx.spec.side).into(),
        ctx.spec.classification().to_string().into(),
        side_name(v.solution.side).into(),
        v.solution.case_tag.to_string().into(),
        v.solution.threshold.into(),
        v.cds_leg.into(),
        v.option_leg.into(),
        v.total.into(),
    ]);
    Ok(t)
}

pub fn spread(ctx: &Context) -> Result<Table, CliError> {
    let s = credit_spread(&ctx.sf, ctx.x(), &ctx.spec, ctx.cfg.premium_rule())?;
    let vanilla = perpetual_spread(&ctx.sf, ctx.x(), ctx.spec.alpha)?;
    let mut t = Table::new(vec!["x", "side", "p_star", "p_star_vanilla", "iterations", "residual"]);
    t.push(vec![
        ctx.x().into(),
        contract_side_name(ctx.spec.side).into(),
        s.p_star.into(),
        vanilla.into(),
        u64::from(s.iterations).into(),
        s.residual.into(),
    ]);
    Ok(t)
}

fn threshold_row(sol: &StoppingSolution) -> Vec<Cell> {
    vec![side_name(sol.side).into(), sol.case_tag.to_string().into(), sol.threshold.into(), sol.fit_residual.into()]
}

pub fn threshold(ctx: &Context) -> Result<Table, CliError> {
    let trip = ctx.spec.triplet()?;
    let mut t = Table::new(vec!["side", "case_tag", "threshold", "fit_residual"]);
    t.push(threshold_row(&solve_b_star(&ctx.sf, &trip)?));
    t.push(threshold_row(&solve_a_star(&ctx.sf, &trip)?));
    Ok(t)
}

pub fn sweep(ctx: &Context) -> Result<Table, CliError> {
    let grid = ctx.cfg.sweep.grid();
    match ctx.cfg.sweep.variable {
        SweepVariable::X => {
            let mut t = Table::new(vec!["x", "p_star_callable", "p_star_putable", "p_star_vanilla"]);
            let call = ctx.cfg.spec_with_premium(ctx.spec.p, ContractSide::Callable)?;
            let put = ctx.cfg.spec_with_premium(ctx.spec.p, ContractSide::Putable)?;
            let rule = ctx.cfg.premium_rule();
            for x in grid {
                t.push(vec![
                    x.into(),
                    credit_spread(&ctx.sf, x, &call, rule)?.p_star.into(),
                    credit_spread(&ctx.sf, x, &put, rule)?.p_star.into(),
                    perpetual_spread(&ctx.sf, x, ctx.spec.alpha)?.into(),
                ]);
            }
            Ok(t)
        }
        SweepVariable::P => {
            let mut lambdas = ctx.cfg.sweep.lambdas.clone();
            if lambdas.is_empty() {
                lambdas.push(ctx.model.jump_rate());
            }
            let mut t = Table::new(vec!["lambda", "p", "b_star", "b_case", "a_star", "a_case"]);
            for lambda in lambdas {
                let sf = ScaleFunction::new(&ctx.cfg.model_with_jump_rate(lambda)?)?;
                for &p in &grid {
                    let trip = ctx.cfg.spec_with_premium(p, ctx.spec.side)?.triplet()?;
                    let b = solve_b_star(&sf, &trip)?;
                    let a = solve_a_star(&sf, &trip)?;
                    t.push(vec![
                        lambda.into(),
                        p.into(),
                        b.threshold.into(),
                        b.case_tag.to_string().into(),
                        a.threshold.into(),
                        a.case_tag.to_string().into(),
                    ]);
                }
            }
            Ok(t)
        }
        SweepVariable::Lambda => {
            let mut t = Table::new(vec!["lambda", "drift", "zeta", "b_star", "a_star", "p_star"]);
            let trip = ctx.spec.triplet()?;
            for lambda in grid {
                let model = ctx.cfg.model_with_jump_rate(lambda)?;
                let sf = ScaleFunction::new(&model)?;
                t.push(vec![
                    lambda.into(),
                    model.drift().into(),
                    sf.zeta(ctx.x()).into(),
                    solve_b_star(&sf, &trip)?.threshold.into(),
                    solve_a_star(&sf, &trip)?.threshold.into(),
                    credit_spread(&sf, ctx.x(), &ctx.spec, ctx.cfg.premium_rule())?.p_star.into(),
                ]);
            }
            Ok(t)
        }
        SweepVariable::Maturity => finite_table(ctx, &grid),
    }
}

fn finite_table(ctx: &Context, maturities: &[f64]) -> Result<Table, CliError> {
    let trip = ctx.spec.triplet()?;
    let sol = solve_option(&ctx.sf, &ctx.spec)?;
    let policy = Policy::from_solution(&sol);
    let x = ctx.x();
    let mut t = Table::new(vec!["x", "T", "lower", "center", "upper", "policy_value", "se"]);
    for &maturity in maturities {
        let paths = ctx.paths_for(maturity);
        let bounds = match sol.side {
            Side::BuyerUpCross => approx_v_bar(&ctx.sf, x, maturity, &trip, &paths)?,
            Side::SellerDownCross => approx_u_bar(&ctx.sf, x, maturity, &trip, &paths)?,
        };
        let value = policy_value_finite(&ctx.model, x, maturity, policy, &ctx.spec, &paths)?;
        t.push(vec![
            x.into(),
            maturity.into(),
            bounds.lower.into(),
            bounds.center.into(),
            bounds.upper.into(),
            value.mean.into(),
            value.se.into(),
        ]);
    }
    Ok(t)
}

pub fn finite(ctx: &Context) -> Result<Table, CliError> {
    let maturity =
        ctx.cfg.contract.maturity.ok_or_else(|| CliError::Config("contract.maturity is required for `finite`".into()))?;
    finite_table(ctx, &[maturity])
}

/// Analytic values next to their simulated counterparts at the contract's
/// start point, plus the per-path contract flows when asked for.
pub fn simulate(ctx: &Context, dump: bool) -> Result<(Table, Option<Table>), CliError> {
    let x = ctx.x();
    let v = contract_value(&ctx.sf, x, &ctx.spec)?;
    let policy = Policy::from_solution(&v.solution);
    let zeta = estimate_default_functionals(&ctx.model, x, &ctx.paths, None)?.zeta;
    let option = evaluate_policy(&ctx.model, x, &ctx.spec, policy, Leg::OptionLeg, &ctx.paths)?;
    let total = evaluate_policy(&ctx.model, x, &ctx.spec, policy, Leg::Contract, &ctx.paths)?;
    let mut t = Table::new(vec!["quantity", "analytic", "mc_mean", "mc_se", "deviation_se", "n_paths"]);
    for (name, analytic, est) in [("zeta", ctx.sf.zeta(x), zeta), ("option_leg", v.option_leg, option), ("total", v.total, total)]
    {
        let dev = if est.se > 0.0 { (est.mean - analytic) / est.se } else { 0.0 };
        t.push(vec![name.into(), analytic.into(), est.mean.into(), est.se.into(), dev.into(), est.n.into()]);
    }
    let paths = if dump {
        let mut p = Table::new(vec!["path_id", "theta", "X_at_theta", "creep", "discounted_payoff"]);
        for f in policy_path_flows(&ctx.model, x, &ctx.spec, policy, Leg::Contract, &ctx.paths)? {
            p.push(vec![
                f.path_id.into(),
                f.theta.unwrap_or(f64::INFINITY).into(),
                f.x_at_theta.into(),
                f.creep.into(),
                f.discounted_payoff.into(),
            ]);
        }
        Some(p)
    } else {
        None
    };
    Ok((t, paths))
}

struct Checks(Table);

impl Checks {
    fn add(&mut self, name: &str, value: f64, tolerance: f64, pass: bool) {
        self.0.push(vec![name.into(), value.into(), tolerance.into(), pass.into()]);
    }
}

/// Runs the invariant suite on the configured model and contract. The
/// second value counts failed checks.
pub fn verify(ctx: &Context) -> Result<(Table, usize), CliError> {
    let sf = &ctx.sf;
    let x = ctx.x();
    let mut c = Checks(Table::new(vec!["check", "value", "tolerance", "pass"]));

    let laplace = (1..=20).map(|k| sf.laplace_residual(sf.phi() + 0.5 * k as f64)).collect::<Result<Vec<_>, _>>()?;
    let worst = laplace.into_iter().fold(0.0, f64::max);
    c.add("laplace_residual", worst, 1e-10, worst < 1e-10);

    let m = &ctx.model;
    let (w0, wp0) = if m.sigma() > 0.0 {
        (0.0, 2.0 / (m.sigma() * m.sigma()))
    } else {
        (1.0 / m.drift(), (m.rate() + m.levy_tail(0.0)) / (m.drift() * m.drift()))
    };
    let dev = (sf.w(0.0) - w0).abs().max((sf.w_prime(0.0) - wp0).abs());
    c.add("scale_function_at_zero", dev, 1e-8, dev < 1e-8);

    let trip = ctx.spec.triplet()?;
    let buyer = solve_b_star(sf, &trip)?;
    let seller = solve_a_star(sf, &trip)?;
    if buyer.case_tag == CaseTag::Interior {
        c.add("buyer_fit_residual", buyer.fit_residual, 1e-9, buyer.fit_residual < 1e-9);
    }
    if seller.case_tag == CaseTag::Interior {
        let a = seller.threshold;
        let jump = (seller.value(a * (1.0 + 1e-13)) - payoff_g(sf, a * (1.0 + 1e-13), &trip)).abs();
        c.add("seller_continuous_fit", jump, 1e-8, jump < 1e-8);
    }

    let top = 4.0 * buyer.threshold.min(50.0).max(seller.threshold).max(1.0);
    let mut slack = f64::INFINITY;
    for k in 1..=500 {
        let y = top * k as f64 / 500.0;
        slack = slack.min(buyer.value(y) - payoff_h(sf, y, &trip).max(0.0));
        slack = slack.min(seller.value(y) - payoff_g(sf, y, &trip).max(0.0));
    }
    c.add("value_dominates_payoff", slack, -1e-10, slack >= -1e-10);

    if ctx.spec.mirror().is_ok() {
        let (a, b) = parity_check(sf, x, &ctx.spec)?;
        let worst = a.max(b);
        c.add("parity", worst, 1e-10 * ctx.spec.alpha, worst < 1e-10 * ctx.spec.alpha);
    }

    let hg = payoff_h(sf, x, &trip) + payoff_g(sf, x, &trip) + 2.0 * trip.gamma;
    let hg_tol = 4.0 * f64::EPSILON * (trip.p_check / sf.rate() + trip.a_check + trip.gamma);
    c.add("payoff_sum", hg.abs(), hg_tol, hg.abs() <= hg_tol);

    let unit = perpetual_spread(sf, x, 1.0)?;
    let lin = (perpetual_spread(sf, x, 2.5)? - 2.5 * unit).abs() / (2.5 * unit);
    c.add("spread_linearity", lin, 1e-12, lin < 1e-12);

    let sol = solve_option(sf, &ctx.spec)?;
    let policy = Policy::from_solution(&sol);
    let zeta = estimate_default_functionals(m, x, &ctx.paths, None)?.zeta;
    let z = (zeta.mean - sf.zeta(x)) / zeta.se;
    c.add("mc_zeta_deviation_se", z, 3.0, z.abs() < 3.0);
    let option = evaluate_policy(m, x, &ctx.spec, policy, Leg::OptionLeg, &ctx.paths)?;
    let z = (option.mean - sol.value(x)) / option.se.max(f64::MIN_POSITIVE);
    c.add("mc_option_leg_deviation_se", z, 3.0, z.abs() < 3.0 || (option.se == 0.0 && option.mean == sol.value(x)));

    let failed = c.0.rows.iter().filter(|row| matches!(&row[3], Cell::Text(s) if s == "false")).count();
    Ok((c.0, failed))
}
