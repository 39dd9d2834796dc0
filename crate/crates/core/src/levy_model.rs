//! Spectrally negative Lévy process with a Brownian part and hyperexponential
//! downward jumps:
//!
//! ```text
//! X_t - X_0 = drift * t + sigma * B_t - sum_{n <= N_t} Z_n,
//! f_Z(z)    = sum_i weight_i * rate_i * exp(-rate_i * z),
//! psi(s)    = drift*s + sigma^2 s^2 / 2 + lambda * sum_i weight_i (rate_i/(rate_i+s) - 1).
//! ```

use crate::error::{Error, Result};
use crate::numeric::{bisect, polish_newton};

/// Tolerance on the normalisation of the phase weights.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Minimum relative separation between two roots of `psi(s) = r`.
pub const ROOT_SEPARATION: f64 = 1e-9;
const POLE_TOLERANCE: f64 = 1e-12;

/// One exponential component of the jump-size mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub weight: f64,
    pub rate: f64,
}

impl Phase {
    pub fn new(weight: f64, rate: f64) -> Self {
        Self { weight, rate }
    }
}

/// Which parameter absorbs the risk-neutral condition `psi(1) = r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreeParameter {
    #[default]
    Drift,
    JumpRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    drift: f64,
    sigma: f64,
    jump_rate: f64,
    phases: Vec<Phase>,
    rate_r: f64,
}

impl LevyModel {
    /// Validates and builds a model. No calibration is performed.
    ///
    /// `phases` may be non-empty while `jump_rate == 0`; the jump part is then
    /// switched off but kept so that a later [`FreeParameter::JumpRate`]
    /// calibration knows the jump law.
    pub fn new(drift: f64, sigma: f64, jump_rate: f64, phases: Vec<Phase>, rate_r: f64) -> Result<Self> {
        for (name, value) in [("drift", drift), ("sigma", sigma), ("jump_rate", jump_rate), ("rate_r", rate_r)] {
            if !value.is_finite() {
                return Err(Error::NegativeParameter { name, value });
            }
        }
        if sigma < 0.0 {
            return Err(Error::NegativeParameter { name: "sigma", value: sigma });
        }
        if jump_rate < 0.0 {
            return Err(Error::NegativeParameter { name: "jump_rate", value: jump_rate });
        }
        if rate_r <= 0.0 {
            return Err(Error::NegativeParameter { name: "rate_r", value: rate_r });
        }
        if jump_rate > 0.0 && phases.is_empty() {
            return Err(Error::MissingPhases);
        }
        for (i, ph) in phases.iter().enumerate() {
            if !(ph.weight > 0.0 && ph.weight <= 1.0) {
                return Err(Error::NegativeParameter { name: "weight", value: ph.weight });
            }
            if !(ph.rate > 0.0 && ph.rate.is_finite()) {
                return Err(Error::NonIncreasingRates { index: i });
            }
            if i > 0 && ph.rate <= phases[i - 1].rate {
                return Err(Error::NonIncreasingRates { index: i });
            }
        }
        if !phases.is_empty() {
            let sum: f64 = phases.iter().map(|p| p.weight).sum();
            if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(Error::WeightsNotNormalized { sum });
            }
        }
        if sigma == 0.0 && drift <= 0.0 {
            return Err(Error::NegativeSubordinator { drift });
        }
        Ok(Self { drift, sigma, jump_rate, phases, rate_r })
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    pub fn rate(&self) -> f64 {
        self.rate_r
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Phases that actually contribute jumps (empty when `jump_rate == 0`).
    pub fn active_phases(&self) -> &[Phase] {
        if self.jump_rate > 0.0 {
            &self.phases
        } else {
            &[]
        }
    }

    pub fn has_jumps(&self) -> bool {
        !self.active_phases().is_empty()
    }

    /// True when paths have bounded variation (no Gaussian part).
    pub fn is_bounded_variation(&self) -> bool {
        self.sigma == 0.0
    }

    /// Same model with a different risk-free rate.
    pub fn with_rate(&self, rate_r: f64) -> Result<Self> {
        Self::new(self.drift, self.sigma, self.jump_rate, self.phases.clone(), rate_r)
    }

    /// Unchecked `psi(s)`; returns +/-inf at a pole.
    pub(crate) fn psi(&self, s: f64) -> f64 {
        let mut jump = 0.0;
        for ph in self.active_phases() {
            jump += ph.weight * (ph.rate / (ph.rate + s) - 1.0);
        }
        self.drift * s + 0.5 * self.sigma * self.sigma * s * s + self.jump_rate * jump
    }

    pub(crate) fn psi_prime(&self, s: f64) -> f64 {
        let mut jump = 0.0;
        for ph in self.active_phases() {
            let d = ph.rate + s;
            jump -= ph.weight * ph.rate / (d * d);
        }
        self.drift + self.sigma * self.sigma * s + self.jump_rate * jump
    }

    /// Laplace exponent `psi(s) = log E[exp(s X_1)]`.
    pub fn laplace_exponent(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        if self.active_phases().iter().any(|ph| (s + ph.rate).abs() < POLE_TOLERANCE) {
            return Err(Error::PoleEvaluation { s });
        }
        Ok(self.psi(s))
    }

    /// Derivative `psi'(s)`.
    pub fn laplace_exponent_derivative(&self, s: f64) -> Result<f64> {
        if self.active_phases().iter().any(|ph| (s + ph.rate).abs() < POLE_TOLERANCE) {
            return Err(Error::PoleEvaluation { s });
        }
        Ok(self.psi_prime(s))
    }

    /// Returns a copy satisfying `psi(1) = r`, solving for the free parameter.
    pub fn calibrate(&self, free: FreeParameter) -> Result<Self> {
        let half_var = 0.5 * self.sigma * self.sigma;
        // sum_i w_i (1 - eta_i/(eta_i + 1)): expected jump compensator at s = 1
        let comp: f64 = self.phases.iter().map(|p| p.weight * (1.0 - p.rate / (p.rate + 1.0))).sum();
        match free {
            FreeParameter::Drift => {
                let jump_rate = if self.phases.is_empty() { 0.0 } else { self.jump_rate };
                let drift = self.rate_r - half_var + jump_rate * comp;
                if self.sigma == 0.0 && drift <= 0.0 {
                    return Err(Error::NoAdmissibleSolution {
                        reason: format!("bounded-variation model needs drift > 0, calibration gives {drift}"),
                    });
                }
                Self::new(drift, self.sigma, self.jump_rate, self.phases.clone(), self.rate_r)
            }
            FreeParameter::JumpRate => {
                if self.phases.is_empty() {
                    return Err(Error::NoAdmissibleSolution { reason: "jump rate is free but no phases are given".into() });
                }
                let lambda = (self.drift + half_var - self.rate_r) / comp;
                if !(lambda >= 0.0) {
                    return Err(Error::NoAdmissibleSolution { reason: format!("required jump rate {lambda} is negative") });
                }
                Self::new(self.drift, self.sigma, lambda, self.phases.clone(), self.rate_r)
            }
        }
    }

    /// Tail of the Lévy measure, `Pi(x, inf) = lambda * sum_i w_i exp(-eta_i x)`.
    pub fn levy_tail(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.jump_rate * self.active_phases().iter().map(|p| p.weight * (-p.rate * x).exp()).sum::<f64>()
    }

    /// Jump density of the Lévy measure, `lambda * f(z)` for `z > 0`.
    pub fn levy_density(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        self.jump_rate * self.active_phases().iter().map(|p| p.weight * p.rate * (-p.rate * z).exp()).sum::<f64>()
    }

    /// Ascending coefficients of `(psi(s) - r) * prod_i (eta_i + s)`.
    pub fn cleared_polynomial(&self, r: f64) -> Vec<f64> {
        let phases = self.active_phases();
        let mut pole_product = vec![1.0];
        for ph in phases {
            pole_product = convolve(&pole_product, &[ph.rate, 1.0]);
        }
        let base = [-self.jump_rate - r, self.drift, 0.5 * self.sigma * self.sigma];
        let mut poly = convolve(&pole_product, &base);
        for (i, ph) in phases.iter().enumerate() {
            let mut others = vec![self.jump_rate * ph.weight * ph.rate];
            for (j, other) in phases.iter().enumerate() {
                if j != i {
                    others = convolve(&others, &[other.rate, 1.0]);
                }
            }
            for (k, c) in others.iter().enumerate() {
                poly[k] += c;
            }
        }
        while poly.len() > 1 && *poly.last().unwrap() == 0.0 {
            poly.pop();
        }
        poly
    }

    /// Roots of `psi(s) = r`, isolated on the interlacing intervals between
    /// the poles `-eta_i`.
    pub fn find_roots(&self, r: f64) -> Result<RootSet> {
        if !(r > 0.0) {
            return Err(Error::DomainError { value: r, reason: "rate must be positive" });
        }
        let degree = self.cleared_polynomial(r).len() - 1;
        let f = |s: f64| self.psi(s) - r;
        let df = |s: f64| self.psi_prime(s);

        // Phi(r): psi(0) - r < 0 and psi grows without bound.
        let mut hi = 1.0;
        while f(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::ComplexRoots { found: 0, expected: degree });
            }
        }
        let phi = refine(&f, &df, 0.0, hi, true);

        let phases = self.active_phases();
        let mut negative = Vec::with_capacity(degree.saturating_sub(1));
        if phases.is_empty() {
            if self.sigma > 0.0 {
                let mut lo = -1.0;
                while f(lo) <= 0.0 {
                    lo *= 2.0;
                    if lo < -1e12 {
                        return Err(Error::ComplexRoots { found: 1, expected: degree });
                    }
                }
                negative.push(refine(&f, &df, lo, 0.0, false));
            }
        } else {
            // (-eta_1, 0): +inf at the pole, -r at zero.
            negative.push(refine(&f, &df, -phases[0].rate, 0.0, false));
            // (-eta_{i+1}, -eta_i): +inf at the left pole, -inf at the right pole.
            for w in phases.windows(2) {
                negative.push(refine(&f, &df, -w[1].rate, -w[0].rate, false));
            }
            if self.sigma > 0.0 {
                // Below -eta_m: +inf as s -> -inf, -inf at the pole.
                let last = -phases[phases.len() - 1].rate;
                let mut lo = 2.0 * last - 1.0;
                while f(lo) <= 0.0 {
                    lo *= 2.0;
                    if lo < -1e15 {
                        return Err(Error::ComplexRoots { found: negative.len() + 1, expected: degree });
                    }
                }
                negative.push(refine(&f, &df, lo, last, false));
            }
        }
        negative.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let found = negative.len() + 1;
        if found != degree {
            return Err(Error::ComplexRoots { found, expected: degree });
        }
        let mut all: Vec<f64> = negative.clone();
        all.push(phi);
        for w in all.windows(2) {
            let scale = w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE);
            if (w[1] - w[0]).abs() < ROOT_SEPARATION * scale {
                return Err(Error::RootMultiplicity { a: w[0], b: w[1] });
            }
        }
        Ok(RootSet { phi_r: phi, negative_roots: negative, degree })
    }
}

/// Solutions of `psi(s) = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// Largest root, `Phi(r)`.
    pub phi_r: f64,
    /// Remaining roots, ascending, all negative.
    pub negative_roots: Vec<f64>,
    /// Degree of the cleared polynomial, equal to the number of roots.
    pub degree: usize,
}

impl RootSet {
    /// All roots, `Phi(r)` first.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.phi_r).chain(self.negative_roots.iter().copied())
    }
}

fn refine<F, D>(f: &F, df: &D, lo: f64, hi: f64, increasing: bool) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let x = bisect(f, lo, hi, increasing);
    polish_newton(f, df, x, lo, hi)
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian() -> LevyModel {
        LevyModel::new(0.01, 0.2, 0.0, vec![], 0.03).unwrap()
    }

    fn single_phase_bv() -> LevyModel {
        LevyModel::new(1.0, 0.0, 0.5, vec![Phase::new(1.0, 2.0)], 0.03).unwrap()
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let e = LevyModel::new(-0.1, 0.0, 0.5, vec![Phase::new(1.0, 2.0)], 0.03).unwrap_err();
        assert!(matches!(e, Error::NegativeSubordinator { .. }));
        let e = LevyModel::new(0.1, 0.2, 0.5, vec![Phase::new(0.5, 2.0), Phase::new(0.5, 1.0)], 0.03).unwrap_err();
        assert!(matches!(e, Error::NonIncreasingRates { index: 1 }));
        let e = LevyModel::new(0.1, 0.2, 0.5, vec![Phase::new(0.5, 1.0), Phase::new(0.4, 2.0)], 0.03).unwrap_err();
        assert!(matches!(e, Error::WeightsNotNormalized { .. }));
        let e = LevyModel::new(0.1, -0.2, 0.0, vec![], 0.03).unwrap_err();
        assert!(matches!(e, Error::NegativeParameter { name: "sigma", .. }));
        let e = LevyModel::new(0.1, 0.2, 0.5, vec![], 0.03).unwrap_err();
        assert_eq!(e, Error::MissingPhases);
    }

    #[test]
    fn laplace_exponent_examples() {
        assert!((brownian().laplace_exponent(1.0).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(single_phase_bv().laplace_exponent(0.0).unwrap(), 0.0);
        assert!((single_phase_bv().laplace_exponent(1.0).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        let e = single_phase_bv().laplace_exponent(-2.0).unwrap_err();
        assert!(matches!(e, Error::PoleEvaluation { .. }));
    }

    #[test]
    fn calibration_examples() {
        let m = LevyModel::new(0.5, 0.2, 0.0, vec![], 0.03).unwrap().calibrate(FreeParameter::Drift).unwrap();
        assert!((m.drift() - 0.01).abs() < 1e-15);
        let m =
            LevyModel::new(1.0, 0.0, 0.0, vec![Phase::new(1.0, 2.0)], 0.03).unwrap().calibrate(FreeParameter::JumpRate).unwrap();
        assert!((m.jump_rate() - 2.91).abs() < 1e-12);
        assert!((m.psi(1.0) - 0.03).abs() < 1e-12);
        let again = m.calibrate(FreeParameter::Drift).unwrap();
        assert!((again.drift() - m.drift()).abs() < 1e-12);
        // drift 0.001 + 0 < r with sigma = 0 needs a negative jump rate
        let e = LevyModel::new(0.001, 0.0, 0.1, vec![Phase::new(1.0, 2.0)], 0.03)
            .unwrap()
            .calibrate(FreeParameter::JumpRate)
            .unwrap_err();
        assert!(matches!(e, Error::NoAdmissibleSolution { .. }));
    }

    #[test]
    fn levy_tail_examples() {
        let m = single_phase_bv();
        assert_eq!(m.levy_tail(0.0), 0.5);
        assert!(m.levy_tail(1e3) < 1e-300);
        assert!((m.levy_tail(2f64.ln() / 2.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn brownian_roots() {
        let roots = brownian().find_roots(0.03).unwrap();
        assert_eq!(roots.degree, 2);
        assert!((roots.phi_r - 1.0).abs() < 1e-14);
        assert_eq!(roots.negative_roots.len(), 1);
        assert!((roots.negative_roots[0] + 1.5).abs() < 1e-14);
    }

    #[test]
    fn single_phase_root_counts() {
        let m = LevyModel::new(0.1, 0.2, 0.5, vec![Phase::new(1.0, 2.0)], 0.03).unwrap().calibrate(FreeParameter::Drift).unwrap();
        let roots = m.find_roots(0.03).unwrap();
        assert_eq!(roots.degree, 3);
        assert_eq!(roots.negative_roots.len(), 2);
        assert!(roots.negative_roots[0] < -2.0 && roots.negative_roots[1] > -2.0);
        let bv = single_phase_bv().find_roots(0.03).unwrap();
        assert_eq!(bv.degree, 2);
        assert!(bv.negative_roots[0] > -2.0 && bv.negative_roots[0] < 0.0);
    }

    #[test]
    fn polynomial_vanishes_at_roots() {
        let m = LevyModel::new(0.1, 0.3, 0.7, vec![Phase::new(0.3, 1.0), Phase::new(0.7, 4.0)], 0.05).unwrap();
        let poly = m.cleared_polynomial(0.05);
        assert_eq!(poly.len(), 5);
        for root in m.find_roots(0.05).unwrap().iter() {
            let val: f64 = poly.iter().rev().fold(0.0, |acc, c| acc * root + c);
            let scale: f64 = poly.iter().enumerate().map(|(k, c)| (c * root.powi(k as i32)).abs()).sum();
            assert!(val.abs() < 1e-12 * scale, "residual {val} at {root}");
        }
    }
}
