//! The r-scale function `W` and its companions as exponential sums.
//!
//! With simple roots `z_j` of `psi(s) = r`, partial fractions give
//! `W(x) = sum_j C_j exp(z_j x)` with `C_j = 1 / psi'(z_j)`. Every evaluator
//! below factors out `exp(Phi(r) x)` so large arguments neither overflow nor
//! cancel.

use crate::error::{Error, Result};
use crate::levy_model::{LevyModel, RootSet};

/// Arguments above this are evaluated through the scaled sums.
const SCALED_ABOVE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFunction {
    model: LevyModel,
    roots: RootSet,
    rate: f64,
    phi: f64,
    c_phi: f64,
    /// `(root, residue)` for the negative roots.
    negative: Vec<(f64, f64)>,
}

impl ScaleFunction {
    /// Builds `W^(r)` for `r = model.rate()`.
    pub fn new(model: &LevyModel) -> Result<Self> {
        Self::with_rate(model, model.rate())
    }

    /// Builds `W^(q)` for an arbitrary positive `q`.
    pub fn with_rate(model: &LevyModel, rate: f64) -> Result<Self> {
        let roots = model.find_roots(rate)?;
        let phi = roots.phi_r;
        let c_phi = 1.0 / model.psi_prime(phi);
        let negative = roots.negative_roots.iter().map(|&z| (z, 1.0 / model.psi_prime(z))).collect();
        Ok(Self { model: model.clone(), roots, rate, phi, c_phi, negative })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `Phi(r)`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(root, C_j)` pairs, `Phi(r)` first.
    pub fn coefficients(&self) -> Vec<(f64, f64)> {
        std::iter::once((self.phi, self.c_phi)).chain(self.negative.iter().copied()).collect()
    }

    /// `exp(-Phi x) W(x)` for `x >= 0`.
    pub fn w_scaled(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.c_phi + self.negative.iter().map(|&(z, c)| c * ((z - self.phi) * x).exp()).sum::<f64>()
    }

    /// `exp(-Phi x) W'(x)` for `x >= 0` (right derivative at 0).
    pub fn w_prime_scaled(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.c_phi * self.phi + self.negative.iter().map(|&(z, c)| c * z * ((z - self.phi) * x).exp()).sum::<f64>()
    }

    /// `exp(-Phi x) W''(x)` for `x >= 0`.
    pub fn w_second_scaled(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.c_phi * self.phi * self.phi + self.negative.iter().map(|&(z, c)| c * z * z * ((z - self.phi) * x).exp()).sum::<f64>()
    }

    /// `exp(-Phi x) Z(x)` for `x >= 0`.
    pub fn z_scaled(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return (-self.phi * x.max(0.0)).exp();
        }
        let decay = (-self.phi * x).exp();
        let mut acc = self.c_phi * (-(-self.phi * x).exp_m1()) / self.phi;
        for &(z, c) in &self.negative {
            acc += c * (((z - self.phi) * x).exp() - decay) / z;
        }
        decay + self.rate * acc
    }

    /// `W(x)`, zero on the negative half-line.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x <= SCALED_ABOVE {
            self.c_phi * (self.phi * x).exp() + self.negative.iter().map(|&(z, c)| c * (z * x).exp()).sum::<f64>()
        } else {
            (self.phi * x).exp() * self.w_scaled(x)
        }
    }

    /// `W'(x)` for `x > 0`; at `x = 0` this is the right limit `W'(0+)`.
    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x <= SCALED_ABOVE {
            self.c_phi * self.phi * (self.phi * x).exp() + self.negative.iter().map(|&(z, c)| c * z * (z * x).exp()).sum::<f64>()
        } else {
            (self.phi * x).exp() * self.w_prime_scaled(x)
        }
    }

    /// `Z(x) = 1 + r * int_0^x W(y) dy`, equal to one for `x <= 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x <= SCALED_ABOVE {
            let mut acc = self.c_phi * (self.phi * x).exp_m1() / self.phi;
            for &(z, c) in &self.negative {
                acc += c * (z * x).exp_m1() / z;
            }
            1.0 + self.rate * acc
        } else {
            (self.phi * x).exp() * self.z_scaled(x)
        }
    }

    /// Laplace transform of the default time, `E^x[exp(-r theta)]`.
    ///
    /// Equals one for `x <= 0` (immediate default). For `x > 0` the growing
    /// `Phi` terms of `Z - (r/Phi) W` cancel exactly, leaving a sum of
    /// decaying exponentials.
    pub fn zeta(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.zeta_right(x)
    }

    /// `zeta` continued to `x = 0` from the right; differs from `zeta(0) = 1`
    /// for bounded-variation models.
    pub fn zeta_right(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        let inv_phi = 1.0 / self.phi;
        let v: f64 = self.negative.iter().map(|&(z, c)| c * (z * x).exp() * (1.0 / z - inv_phi)).sum();
        (self.rate * v).clamp(0.0, 1.0)
    }

    /// Derivative of `zeta` on `(0, inf)`; at zero the right derivative.
    pub fn zeta_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let inv_phi = 1.0 / self.phi;
        self.rate * self.negative.iter().map(|&(z, c)| c * (z * x).exp() * (1.0 - z * inv_phi)).sum::<f64>()
    }

    /// `|(int_0^inf e^{-sx} W(x) dx) (psi(s) - r) - 1|` using the termwise
    /// transform `sum_j C_j / (s - z_j)`.
    pub fn laplace_residual(&self, s: f64) -> Result<f64> {
        if !(s > self.phi) {
            return Err(Error::DomainError { value: s, reason: "transform of W needs s > Phi(r)" });
        }
        let transform = self.c_phi / (s - self.phi) + self.negative.iter().map(|&(z, c)| c / (s - z)).sum::<f64>();
        let psi = self.model.laplace_exponent(s)?;
        Ok((transform * (psi - self.rate) - 1.0).abs())
    }
}
