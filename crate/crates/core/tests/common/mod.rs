#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepcds_core::cds_pricing::SwitchTriplet;
use stepcds_core::swap_contracts::{ContractSide, ContractSpec};
use stepcds_core::{FreeParameter, LevyModel, Phase, ScaleFunction};

pub const R: f64 = 0.03;
pub const SIGMA: f64 = 0.2;
pub const X0: f64 = 1.5;
pub const ALPHA: f64 = 1.0;
pub const GAMMA: f64 = 0.005;
pub const Q: f64 = 0.5;
pub const LAMBDA: f64 = 0.2;
pub const P_BASE: f64 = 0.02;

/// Six-phase hyperexponential fit to the Pareto law `1 - (1 + 5t)^-1.2`.
pub fn pareto_phases() -> Vec<Phase> {
    let weights = [0.002132, 0.010068, 0.041471, 0.157474, 0.423165];
    let rates = [0.013297, 0.076951, 0.284577, 0.986339, 3.373506, 11.397446];
    let mut phases: Vec<Phase> = weights.iter().zip(&rates).map(|(&w, &r)| Phase::new(w, r)).collect();
    phases.push(Phase::new(1.0 - weights.iter().sum::<f64>(), rates[5]));
    phases
}

pub fn base_model(lambda: f64) -> LevyModel {
    LevyModel::new(0.0, SIGMA, lambda, pareto_phases(), R).unwrap().calibrate(FreeParameter::Drift).unwrap()
}

pub fn base_sf() -> ScaleFunction {
    ScaleFunction::new(&base_model(LAMBDA)).unwrap()
}

pub fn brownian_model() -> LevyModel {
    LevyModel::new(0.01, 0.2, 0.0, vec![], 0.03).unwrap()
}

/// `(p_check, a_check, gamma)` of the base step-down contract.
pub fn base_trip() -> SwitchTriplet {
    SwitchTriplet::new((1.0 - Q) * P_BASE, (1.0 - Q) * ALPHA, GAMMA).unwrap()
}

pub fn base_spec(side: ContractSide) -> ContractSpec {
    ContractSpec::proportional(P_BASE, ALPHA, Q, GAMMA, side).unwrap()
}

/// A random calibrated model; `sigma = 0` in roughly a quarter of draws.
pub fn random_model(rng: &mut ChaCha8Rng) -> LevyModel {
    loop {
        let sigma = if rng.random::<f64>() < 0.25 { 0.0 } else { rng.random_range(0.05..0.4) };
        let m = rng.random_range(1..=4);
        let mut rates: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..8.0)).collect();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rates.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let mut weights: Vec<f64> = rates.iter().map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let phases = rates.iter().zip(&weights).map(|(&r, &w)| Phase::new(w, r)).collect();
        let lambda = rng.random_range(0.05..1.0);
        let r = rng.random_range(0.01..0.08);
        let Ok(model) = LevyModel::new(1.0, sigma, lambda, phases, r) else { continue };
        if let Ok(model) = model.calibrate(FreeParameter::Drift) {
            return model;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Result line shared by the acceptance checks.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
