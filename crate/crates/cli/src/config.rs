//! Run configuration: one TOML file with `model`, `contract`, `sweep`, `mc`
//! and `output` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stepcds_core::montecarlo::PathSimConfig;
use stepcds_core::swap_contracts::{ContractSide, ContractSpec, PremiumRule};
use stepcds_core::{FreeParameter, LevyModel, Phase};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub contract: ContractSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calibrate {
    Drift,
    JumpRate,
    None,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEntry {
    pub weight: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Starting value when the drift is calibrated.
    #[serde(default)]
    pub drift: f64,
    pub sigma: f64,
    #[serde(default)]
    pub jump_rate: f64,
    #[serde(default)]
    pub phases: Vec<PhaseEntry>,
    pub r: f64,
    #[serde(default = "default_calibrate")]
    pub calibrate_free: Calibrate,
}

fn default_calibrate() -> Calibrate {
    Calibrate::Drift
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideName {
    Callable,
    Putable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSection {
    pub x: f64,
    pub p: f64,
    /// Either `p_hat` or `q` (with `p_hat = q p`) must be given.
    pub p_hat: Option<f64>,
    pub q: Option<f64>,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Defaults to `q alpha` when `q` is given.
    pub alpha_hat: Option<f64>,
    #[serde(default)]
    pub gamma: f64,
    pub side: SideName,
    pub maturity: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "T")]
    Maturity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_variable")]
    pub variable: SweepVariable,
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_stop")]
    pub stop: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Explicit grid; overrides `start`, `stop` and `steps`.
    pub values: Option<Vec<f64>>,
    /// Jump rates for `variable = "p"`; the model's own when empty.
    #[serde(default)]
    pub lambdas: Vec<f64>,
}

fn default_variable() -> SweepVariable {
    SweepVariable::X
}
fn default_start() -> f64 {
    0.5
}
fn default_stop() -> f64 {
    3.0
}
fn default_steps() -> usize {
    11
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variable: default_variable(),
            start: default_start(),
            stop: default_stop(),
            steps: default_steps(),
            values: None,
            lambdas: Vec::new(),
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = self.steps - 1;
        (0..=n).map(|k| self.start + (self.stop - self.start) * k as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    /// Path count under `--profile test`.
    #[serde(default = "default_test_paths")]
    pub test_paths: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Defaults to `20 / r`.
    pub horizon: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "yes")]
    pub bridge_correction: bool,
    #[serde(default = "default_truncation")]
    pub truncation_tolerance: f64,
}

fn default_paths() -> usize {
    100_000
}
fn default_test_paths() -> usize {
    2_000
}
fn default_dt() -> f64 {
    1e-3
}
fn default_seed() -> u64 {
    42
}
fn yes() -> bool {
    true
}
fn default_truncation() -> f64 {
    1e-6
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            test_paths: default_test_paths(),
            dt: default_dt(),
            horizon: None,
            seed: default_seed(),
            bridge_correction: true,
            truncation_tolerance: default_truncation(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_precision() -> usize {
    10
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { csv: None, precision: default_precision() }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let c = &self.contract;
        match (c.p_hat, c.q) {
            (Some(_), Some(_)) => return Err(invalid("contract: give either p_hat or q, not both")),
            (None, None) => return Err(invalid("contract: one of p_hat or q is required")),
            (Some(_), None) if c.alpha_hat.is_none() => return Err(invalid("contract: alpha_hat is required with p_hat")),
            _ => {}
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(invalid(format!("output.precision must be in 1..=17, got {}", self.output.precision)));
        }
        if self.sweep.values.is_none() && self.sweep.steps == 0 {
            return Err(invalid("sweep.steps must be positive"));
        }
        if self.mc.n_paths == 0 || self.mc.test_paths == 0 {
            return Err(invalid("mc path counts must be positive"));
        }
        // Building every derived object validates the numbers themselves.
        self.model_with_jump_rate(self.model.jump_rate)?;
        self.spec()?;
        Ok(())
    }

    /// The model with `jump_rate` replaced, then calibrated as configured.
    pub fn model_with_jump_rate(&self, jump_rate: f64) -> Result<LevyModel, CliError> {
        let m = &self.model;
        let phases = m.phases.iter().map(|p| Phase::new(p.weight, p.rate)).collect();
        let raw = LevyModel::new(m.drift, m.sigma, jump_rate, phases, m.r).map_err(|e| invalid(format!("model: {e}")))?;
        let free = match m.calibrate_free {
            Calibrate::None => return Ok(raw),
            Calibrate::Drift => FreeParameter::Drift,
            Calibrate::JumpRate => FreeParameter::JumpRate,
        };
        raw.calibrate(free).map_err(|e| invalid(format!("model calibration: {e}")))
    }

    pub fn model(&self) -> Result<LevyModel, CliError> {
        self.model_with_jump_rate(self.model.jump_rate)
    }

    pub fn side(&self) -> ContractSide {
        match self.contract.side {
            SideName::Callable => ContractSide::Callable,
            SideName::Putable => ContractSide::Putable,
        }
    }

    pub fn premium_rule(&self) -> PremiumRule {
        match (self.contract.q, self.contract.p_hat) {
            (Some(q), _) => PremiumRule::Proportional(q),
            (None, Some(p_hat)) => PremiumRule::Fixed(p_hat),
            (None, None) => unreachable!("checked on load"),
        }
    }

    /// The configured contract with premium `p`, following the premium rule.
    pub fn spec_with_premium(&self, p: f64, side: ContractSide) -> Result<ContractSpec, CliError> {
        let c = &self.contract;
        let p_hat = match self.premium_rule() {
            PremiumRule::Proportional(q) => q * p,
            PremiumRule::Fixed(p_hat) => p_hat,
        };
        let alpha_hat = c.alpha_hat.unwrap_or_else(|| c.q.unwrap_or(1.0) * c.alpha);
        ContractSpec::new(p, p_hat, c.alpha, alpha_hat, c.gamma, side).map_err(|e| invalid(format!("contract: {e}")))
    }

    pub fn spec(&self) -> Result<ContractSpec, CliError> {
        self.spec_with_premium(self.contract.p, self.side())
    }

    pub fn path_config(&self, test_profile: bool, seed: Option<u64>) -> PathSimConfig {
        let m = &self.mc;
        let n = if test_profile { m.test_paths.min(m.n_paths) } else { m.n_paths };
        let mut cfg = PathSimConfig::new(n, seed.unwrap_or(m.seed), self.model.r);
        cfg.dt = m.dt;
        if let Some(h) = m.horizon {
            cfg.horizon = h;
        }
        cfg.bridge_correction = m.bridge_correction;
        cfg.truncation_tolerance = m.truncation_tolerance;
        cfg
    }
}
