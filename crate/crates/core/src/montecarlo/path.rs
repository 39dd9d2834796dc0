use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{map_paths, PathSimConfig};
use crate::error::{Error, Result};
use crate::levy_model::LevyModel;

/// A step covers at most this fraction of the diffusive time scale
/// `d^2 / sigma^2` to the nearest open barrier.
const DIFFUSIVE_FRACTION: f64 = 0.05;
/// ... and at most this fraction of the drift time `d / |mu|`.
const DRIFT_FRACTION: f64 = 0.25;
/// Longest Brownian step far away from every barrier.
const MAX_STEP: f64 = 2.0;

/// Extra levels whose first passages are recorded along each path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Barriers {
    /// Levels above the start; passage time is the first `X_t >= B`.
    pub up: Vec<f64>,
    /// Positive levels below the start; passage is the first `X_t < A`.
    pub down: Vec<f64>,
}

/// First passage below a down barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownHit {
    pub time: f64,
    /// Process value right after the passage (the barrier itself for a
    /// diffusive crossing).
    pub level: f64,
    pub creep: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    /// Default time, `None` if alive at the horizon.
    pub theta: Option<f64>,
    /// `X` at default: `0` on a creeping default, the undershoot after a
    /// jump. For a path alive at the horizon, `X` at the horizon.
    pub x_at_theta: f64,
    pub creep: bool,
    /// First passage times of `Barriers::up`, in the same order.
    pub up_hits: Vec<Option<f64>>,
    /// First passages of `Barriers::down`, in the same order.
    pub down_hits: Vec<Option<DownHit>>,
}

impl PathRecord {
    /// Default time with alive paths at `+inf`.
    pub fn theta_or_inf(&self) -> f64 {
        self.theta.unwrap_or(f64::INFINITY)
    }
}

fn sample_jump(model: &LevyModel, rng: &mut ChaCha8Rng) -> f64 {
    let phases = model.active_phases();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut rate = phases[phases.len() - 1].rate;
    for ph in phases {
        acc += ph.weight;
        if u < acc {
            rate = ph.rate;
            break;
        }
    }
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Uniform on `(0, 1]`, safe for `ln`.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Simulates one path started at `x` until default or the horizon.
pub fn simulate_path(model: &LevyModel, x: f64, cfg: &PathSimConfig, barriers: &Barriers, rng: &mut ChaCha8Rng) -> PathRecord {
    let mut rec = PathRecord {
        theta: None,
        x_at_theta: f64::NAN,
        creep: false,
        up_hits: vec![None; barriers.up.len()],
        down_hits: vec![None; barriers.down.len()],
    };
    if x <= 0.0 {
        rec.theta = Some(0.0);
        rec.x_at_theta = x;
        rec.creep = x == 0.0;
        return rec;
    }
    for (hit, &b) in rec.up_hits.iter_mut().zip(&barriers.up) {
        if x >= b {
            *hit = Some(0.0);
        }
    }
    for (hit, &a) in rec.down_hits.iter_mut().zip(&barriers.down) {
        if x < a {
            *hit = Some(DownHit { time: 0.0, level: x, creep: false });
        }
    }

    let mu = model.drift();
    let sigma = model.sigma();
    let lambda = if model.has_jumps() { model.jump_rate() } else { 0.0 };
    let horizon = cfg.horizon;
    let mut next_jump = if lambda > 0.0 { rng.sample::<f64, _>(Exp1) / lambda } else { f64::INFINITY };
    let mut t = 0.0;
    let mut xc = x;

    while t < horizon {
        let (t_end, at_jump, x_new) = if sigma > 0.0 {
            let mut d = xc;
            for (hit, &a) in rec.down_hits.iter().zip(&barriers.down) {
                if hit.is_none() {
                    d = d.min(xc - a);
                }
            }
            let mut open_up = false;
            for (hit, &b) in rec.up_hits.iter().zip(&barriers.up) {
                if hit.is_none() {
                    open_up = true;
                    d = d.min(b - xc);
                }
            }
            let mut h = DIFFUSIVE_FRACTION * d * d / (sigma * sigma);
            if mu != 0.0 {
                h = h.min(DRIFT_FRACTION * d / mu.abs());
            }
            h = h.clamp(cfg.dt, MAX_STEP);
            let (t_end, at_jump) = if t + h >= next_jump && next_jump <= horizon {
                (next_jump, true)
            } else if t + h >= horizon {
                (horizon, false)
            } else {
                (t + h, false)
            };
            let h = t_end - t;
            let z: f64 = rng.sample(StandardNormal);
            let x_new = xc + mu * h + sigma * h.sqrt() * z;
            let (lo, hi) = if cfg.bridge_correction {
                let s2h = sigma * sigma * h;
                let diff = xc - x_new;
                let lo = 0.5 * ((xc + x_new) - (diff * diff - 2.0 * s2h * open_uniform(rng).ln()).sqrt());
                let hi = if open_up {
                    0.5 * ((xc + x_new) + (diff * diff - 2.0 * s2h * open_uniform(rng).ln()).sqrt())
                } else {
                    f64::NEG_INFINITY
                };
                (lo, hi)
            } else {
                (xc.min(x_new), xc.max(x_new))
            };
            for (hit, &a) in rec.down_hits.iter_mut().zip(&barriers.down) {
                if hit.is_none() && lo < a {
                    *hit = Some(DownHit { time: t_end, level: a, creep: true });
                }
            }
            if lo <= 0.0 {
                rec.theta = Some(t_end);
                rec.x_at_theta = 0.0;
                rec.creep = true;
                return rec;
            }
            for (hit, &b) in rec.up_hits.iter_mut().zip(&barriers.up) {
                if hit.is_none() && hi >= b {
                    *hit = Some(t_end);
                }
            }
            (t_end, at_jump, x_new)
        } else {
            let (t_end, at_jump) = if next_jump <= horizon { (next_jump, true) } else { (horizon, false) };
            let x_new = xc + mu * (t_end - t);
            for (hit, &b) in rec.up_hits.iter_mut().zip(&barriers.up) {
                if hit.is_none() && x_new >= b {
                    *hit = Some(t + (b - xc) / mu);
                }
            }
            (t_end, at_jump, x_new)
        };
        t = t_end;
        xc = x_new;
        if at_jump {
            xc -= sample_jump(model, rng);
            for (hit, &a) in rec.down_hits.iter_mut().zip(&barriers.down) {
                if hit.is_none() && xc < a {
                    *hit = Some(DownHit { time: t, level: xc, creep: false });
                }
            }
            if xc <= 0.0 {
                rec.theta = Some(t);
                rec.x_at_theta = xc;
                rec.creep = false;
                return rec;
            }
            next_jump = t + rng.sample::<f64, _>(Exp1) / lambda;
        }
    }
    rec.x_at_theta = xc;
    rec
}

/// Default times of `cfg.n_paths` independent paths started at `x`.
pub fn simulate_first_passage(model: &LevyModel, x: f64, cfg: &PathSimConfig) -> Result<Vec<PathRecord>> {
    cfg.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidConfig(format!("start value must be finite, got {x}")));
    }
    let barriers = Barriers::default();
    Ok(map_paths(cfg.n_paths, cfg.seed, |_, rng| simulate_path(model, x, cfg, &barriers, rng)))
}
