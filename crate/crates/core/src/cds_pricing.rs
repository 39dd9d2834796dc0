//! Perpetual vanilla CDS, the exercise payoffs of the two stopping problems,
//! and the analytic functionals `G(B)`, `rho(A)` and `Gamma(x; A)`.

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::scale_functions::ScaleFunction;

/// Direction of the post-exercise change, before normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Premium and protection are reduced (`p_check, a_check >= 0`).
    StepDown,
    /// Premium and protection are increased.
    StepUp,
}

/// `(p_check, a_check, gamma)` stored in step-down orientation.
///
/// A step-up triplet `(-p, -a, gamma)` is stored as `(p, a, gamma)` with
/// [`Orientation::StepUp`]; the stopping problems only ever see the
/// normalised magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchTriplet {
    pub p_check: f64,
    pub a_check: f64,
    pub gamma: f64,
    pub orientation: Orientation,
}

impl SwitchTriplet {
    /// Normalises raw reductions `p_check = p - p_hat`, `a_check = alpha - alpha_hat`.
    pub fn new(p_check: f64, a_check: f64, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::NegativeParameter { name: "gamma", value: gamma });
        }
        if p_check * a_check < 0.0 {
            return Err(Error::MixedSpecification { p_check, a_check });
        }
        let orientation = if p_check < 0.0 || a_check < 0.0 { Orientation::StepUp } else { Orientation::StepDown };
        Ok(Self { p_check: p_check.abs(), a_check: a_check.abs(), gamma, orientation })
    }

    /// Raw `(p_check, a_check)` with their original signs.
    pub fn signed(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::StepDown => (self.p_check, self.a_check),
            Orientation::StepUp => (-self.p_check, -self.a_check),
        }
    }
}

/// Buyer's perpetual CDS price `C(x; p, alpha) = (p/r + alpha) zeta(x) - p/r`.
pub fn perpetual_cds_value(sf: &ScaleFunction, x: f64, p: f64, alpha: f64) -> f64 {
    let r = sf.rate();
    (p / r + alpha) * sf.zeta(x) - p / r
}

/// Premium making the perpetual CDS worthless: `alpha r zeta / (1 - zeta)`.
pub fn perpetual_spread(sf: &ScaleFunction, x: f64, alpha: f64) -> Result<f64> {
    let z = sf.zeta(x);
    if x <= 0.0 || z >= 1.0 - 1e-14 {
        return Err(Error::DegenerateAtDefault { x });
    }
    Ok(alpha * sf.rate() * z / (1.0 - z))
}

/// Buyer's exercise payoff `h`.
pub fn payoff_h(sf: &ScaleFunction, x: f64, trip: &SwitchTriplet) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let pr = trip.p_check / sf.rate();
    (pr - trip.gamma) - (pr + trip.a_check) * sf.zeta(x)
}

/// Seller's exercise payoff `g`.
pub fn payoff_g(sf: &ScaleFunction, x: f64, trip: &SwitchTriplet) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let pr = trip.p_check / sf.rate();
    (-pr - trip.gamma) + (pr + trip.a_check) * sf.zeta(x)
}

/// `g(0+)`, the supremum of the seller's payoff.
pub fn payoff_g_at_zero(sf: &ScaleFunction, trip: &SwitchTriplet) -> f64 {
    let pr = trip.p_check / sf.rate();
    (-pr - trip.gamma) + (pr + trip.a_check) * sf.zeta_right(0.0)
}

/// `G(B) = (p_check/r)(Z(B) - 1) + a_check Z(B) + gamma`.
pub fn big_g(sf: &ScaleFunction, b: f64, trip: &SwitchTriplet) -> f64 {
    let z = sf.z(b);
    trip.p_check / sf.rate() * (z - 1.0) + trip.a_check * z + trip.gamma
}

/// `exp(-Phi B) G(B)`.
pub fn big_g_scaled(sf: &ScaleFunction, b: f64, trip: &SwitchTriplet) -> f64 {
    let decay = (-sf.phi() * b.max(0.0)).exp();
    let zs = sf.z_scaled(b);
    trip.p_check / sf.rate() * (zs - decay) + trip.a_check * zs + trip.gamma * decay
}

/// `rho(A) = int_A^inf Pi(du) (1 - exp(-Phi (u - A)))`, in closed form.
pub fn rho(sf: &ScaleFunction, a: f64) -> f64 {
    let model = sf.model();
    let phi = sf.phi();
    let a = a.max(0.0);
    model.jump_rate() * model.active_phases().iter().map(|p| p.weight * (-p.rate * a).exp() * phi / (p.rate + phi)).sum::<f64>()
}

fn rho_prime(sf: &ScaleFunction, a: f64) -> f64 {
    let model = sf.model();
    let phi = sf.phi();
    -model.jump_rate()
        * model.active_phases().iter().map(|p| p.weight * p.rate * (-p.rate * a).exp() * phi / (p.rate + phi)).sum::<f64>()
}

/// `Gamma(x; A) = E^x[exp(-r tau_A^-) 1{X(tau_A^-) < 0}]`: discounted
/// probability that the first passage below `A` overshoots the default
/// barrier. Zero for `x < A`; `A = 0` gives the limit `A -> 0+`.
///
/// The jump-measure integrals are done termwise; the growing `Phi` terms
/// cancel exactly and the `Phi` root contributes `C_Phi rho(x) / Phi`.
pub fn big_gamma(sf: &ScaleFunction, x: f64, a: f64) -> f64 {
    let a = a.max(0.0);
    if x < a {
        return 0.0;
    }
    let model = sf.model();
    if !model.has_jumps() {
        return 0.0;
    }
    let lambda = model.jump_rate();
    let phi = sf.phi();
    let y = x - a;
    let rho_a = rho(sf, a);
    let tail_a = model.levy_tail(a);
    let coeffs = sf.coefficients();
    let (_, c_phi) = coeffs[0];
    let mut total = c_phi * rho(sf, x) / phi;
    for &(z, c) in &coeffs[1..] {
        let ezy = (z * y).exp();
        let mut term = c / phi * ezy * rho_a - c / z * (ezy - 1.0) * tail_a;
        let mut jump = 0.0;
        for ph in model.active_phases() {
            let ea = (-ph.rate * a).exp();
            let ex = (-ph.rate * x).exp();
            jump += ph.weight * (ph.rate / (ph.rate + z) * (ezy * ea - ex) - ea + ex);
        }
        term += c / z * lambda * jump;
        total += term;
    }
    total.max(0.0)
}

/// `d/dx Gamma(x; A)` for `x > A`.
pub fn big_gamma_prime(sf: &ScaleFunction, x: f64, a: f64) -> f64 {
    let a = a.max(0.0);
    if x < a {
        return 0.0;
    }
    let model = sf.model();
    if !model.has_jumps() {
        return 0.0;
    }
    let lambda = model.jump_rate();
    let phi = sf.phi();
    let y = x - a;
    let rho_a = rho(sf, a);
    let tail_a = model.levy_tail(a);
    let coeffs = sf.coefficients();
    let (_, c_phi) = coeffs[0];
    let mut total = c_phi * rho_prime(sf, x) / phi;
    for &(z, c) in &coeffs[1..] {
        let ezy = (z * y).exp();
        let mut term = c * z / phi * ezy * rho_a - c * ezy * tail_a;
        let mut jump = 0.0;
        for ph in model.active_phases() {
            let ea = (-ph.rate * a).exp();
            let ex = (-ph.rate * x).exp();
            jump += ph.weight * (ph.rate / (ph.rate + z) * (z * ezy * ea + ph.rate * ex) - ph.rate * ex);
        }
        term += c / z * lambda * jump;
        total += term;
    }
    total
}

/// Quadrature evaluation of `Gamma(x; A)` straight from its scale-function
/// representation; used to cross-check [`big_gamma`].
pub fn big_gamma_quadrature(sf: &ScaleFunction, x: f64, a: f64) -> f64 {
    let a = a.max(0.0);
    if x < a {
        return 0.0;
    }
    let model = sf.model();
    let zxa = sf.z(x - a);
    // int_A^inf Pi(du) (Z(x-A) - Z(x-u)); Z(x-u) = 1 beyond u = x.
    let inner = adaptive_simpson(&|u: f64| model.levy_density(u) * (zxa - sf.z(x - u)), a, x, 1e-13);
    let beyond = (zxa - 1.0) * model.levy_tail(x);
    sf.w(x - a) * rho(sf, a) / sf.phi() - (inner + beyond) / sf.rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{FreeParameter, LevyModel, Phase};

    fn brownian_sf() -> ScaleFunction {
        ScaleFunction::new(&LevyModel::new(0.01, 0.2, 0.0, vec![], 0.03).unwrap()).unwrap()
    }

    fn jump_sf(sigma: f64) -> ScaleFunction {
        let m = LevyModel::new(0.5, sigma, 0.5, vec![Phase::new(0.4, 1.0), Phase::new(0.6, 3.0)], 0.03)
            .unwrap()
            .calibrate(FreeParameter::Drift)
            .unwrap();
        ScaleFunction::new(&m).unwrap()
    }

    #[test]
    fn triplet_normalisation() {
        let t = SwitchTriplet::new(-0.002, -0.5, 0.005).unwrap();
        assert_eq!(t.orientation, Orientation::StepUp);
        assert_eq!((t.p_check, t.a_check), (0.002, 0.5));
        assert_eq!(t.signed(), (-0.002, -0.5));
        assert!(matches!(SwitchTriplet::new(0.01, -0.5, 0.0), Err(Error::MixedSpecification { .. })));
    }

    #[test]
    fn cds_value_and_spread() {
        let sf = brownian_sf();
        assert!((perpetual_cds_value(&sf, -1.0, 0.02, 0.6) - 0.6).abs() < 1e-15);
        let p = perpetual_spread(&sf, 1.5, 1.0).unwrap();
        assert!((p - 3.534e-3).abs() < 1e-6);
        assert!(perpetual_cds_value(&sf, 1.5, p, 1.0).abs() < 1e-12);
        assert!(perpetual_spread(&sf, 1e4, 1.0).unwrap() < 1e-300);
        assert!(matches!(perpetual_spread(&sf, 0.0, 1.0), Err(Error::DegenerateAtDefault { .. })));
        let c = perpetual_cds_value(&sf, 0.7, 0.013, 0.4);
        assert_eq!(perpetual_cds_value(&sf, 0.7, -0.013, -0.4), -c);
    }

    #[test]
    fn payoffs_limits() {
        let sf = brownian_sf();
        let t = SwitchTriplet::new(0.002, 0.5, 0.005).unwrap();
        assert_eq!(payoff_h(&sf, 0.0, &t), 0.0);
        assert_eq!(payoff_g(&sf, -1.0, &t), 0.0);
        assert!((payoff_h(&sf, 500.0, &t) - (0.002 / 0.03 - 0.005)).abs() < 1e-15);
        assert!((payoff_g(&sf, 500.0, &t) - (-0.002 / 0.03 - 0.005)).abs() < 1e-15);
        assert!((payoff_g_at_zero(&sf, &t) - (0.5 - 0.005)).abs() < 1e-12);
    }

    #[test]
    fn big_g_brownian_value() {
        let sf = brownian_sf();
        let t = SwitchTriplet::new(0.002, 0.5, 0.005).unwrap();
        assert!((big_g(&sf, 0.0, &t) - 0.505).abs() < 1e-15);
        let z1 = 0.6 * 1f64.exp() + 0.4 * (-1.5f64).exp();
        let expected = 0.002 / 0.03 * (z1 - 1.0) + 0.5 * z1 + 0.005;
        assert!((big_g(&sf, 1.0, &t) - expected).abs() < 1e-13);
        assert!((big_g_scaled(&sf, 1.0, &t) * 1f64.exp() - expected).abs() < 1e-13);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&brownian_sf(), 0.0), 0.0);
        let m = LevyModel::new(1.0, 0.0, 0.5, vec![Phase::new(1.0, 2.0)], 0.03).unwrap();
        let sf = ScaleFunction::new(&m).unwrap();
        let phi = sf.phi();
        assert!((rho(&sf, 0.0) - 0.5 * phi / (2.0 + phi)).abs() < 1e-15);
        assert!(rho(&sf, 500.0) < 1e-300);
    }

    #[test]
    fn gamma_matches_quadrature() {
        for sigma in [0.0, 0.25] {
            let sf = jump_sf(sigma);
            for &(x, a) in &[(0.3, 0.0), (1.5, 0.0), (1.5, 0.4), (3.0, 1.0), (0.9, 0.8)] {
                let closed = big_gamma(&sf, x, a);
                let quad = big_gamma_quadrature(&sf, x, a);
                assert!((closed - quad).abs() < 1e-9, "sigma {sigma} x {x} a {a}: {closed} vs {quad}");
                assert!(closed >= 0.0 && closed <= sf.zeta(x) + 1e-12);
            }
            assert_eq!(big_gamma(&sf, 0.5, 1.0), 0.0);
        }
        assert_eq!(big_gamma(&brownian_sf(), 2.0, 0.5), 0.0);
    }

    #[test]
    fn creeping_gap_sign() {
        let bv = jump_sf(0.0);
        for &x in &[0.2, 1.0, 2.0] {
            assert!((bv.zeta(x) - big_gamma(&bv, x, 0.0)).abs() < 1e-10);
        }
        let ubv = jump_sf(0.25);
        for &x in &[0.2, 1.0, 2.0] {
            assert!(ubv.zeta(x) - big_gamma(&ubv, x, 0.0) > 1e-6);
        }
    }

    #[test]
    fn gamma_prime_matches_finite_difference() {
        let sf = jump_sf(0.25);
        for &(x, a) in &[(1.0, 0.3), (2.5, 1.0)] {
            let h = 1e-6;
            let fd = (big_gamma(&sf, x + h, a) - big_gamma(&sf, x - h, a)) / (2.0 * h);
            assert!((big_gamma_prime(&sf, x, a) - fd).abs() < 1e-7);
        }
    }
}
