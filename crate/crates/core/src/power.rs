//! Solar-array and bus power as functions of heliocentric distance and mission time.
//!
//! Distances are in AU and times in seconds since launch; powers in watts.
//! The distance-dependent terms are generic over [`Scalar`] because available
//! power enters the Hamiltonian through the spacecraft position.

use crate::canonical::{DAYS_PER_JULIAN_YEAR, SECONDS_PER_DAY};
use crate::error::{CscError, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Fitted array coefficients A1..A5 used for the benchmark spacecraft.
pub const BENCHMARK_A: [f64; 5] = [1.321, -0.108, -0.117, 0.108, -0.013];
/// Coefficients reducing φ(r) to the inverse-square law.
pub const INVERSE_SQUARE_A: [f64; 5] = [1.0, 0.0, 0.0, 0.0, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Beginning-of-life array power at 1 AU, W.
    pub p0_bol: f64,
    pub a_coeffs: [f64; 5],
    /// Yearly fractional decay of the arrays.
    pub sigma: f64,
    /// Bus draw D1 (W), D2 (W·AU), D3 (W·AU²).
    pub d_coeffs: [f64; 3],
    /// Minimum usable thruster power, W.
    pub p_ava_min: f64,
    /// When false the array output ignores distance (φ ≡ 1).
    pub distance_dependent: bool,
    /// Optional cap on the power delivered to the thruster, W.
    pub p_max_cap: Option<f64>,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p0_bol: 10_000.0,
            a_coeffs: BENCHMARK_A,
            sigma: 0.02,
            d_coeffs: [400.0, 0.0, 0.0],
            p_ava_min: 0.0,
            distance_dependent: true,
            p_max_cap: None,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0_bol > 0.0) {
            return Err(CscError::Config("power.p0_bol must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(CscError::Config("power.sigma must lie in [0, 1)".into()));
        }
        if let Some(cap) = self.p_max_cap {
            if !(cap > 0.0) {
                return Err(CscError::Config("power.p_max_cap must be positive".into()));
            }
        }
        Ok(())
    }

    /// Soft check that φ(1 AU) is within 0.5% of one.
    pub fn normalization_ok(&self) -> bool {
        (phi_coeffs(&self.a_coeffs, 1.0_f64) - 1.0).abs() <= 5e-3
    }

    pub fn phi<S: Scalar>(&self, r_au: S) -> Result<S> {
        if !(r_au.re() > 0.0) {
            return Err(CscError::Domain(format!("heliocentric distance {} <= 0", r_au.re())));
        }
        if !self.distance_dependent {
            return Ok(S::from_real(1.0));
        }
        Ok(phi_coeffs(&self.a_coeffs, r_au))
    }

    pub fn psi(&self, t_seconds: f64) -> f64 {
        let tau = t_seconds.max(0.0) / (SECONDS_PER_DAY * DAYS_PER_JULIAN_YEAR);
        (1.0 - self.sigma).powf(tau)
    }

    pub fn solar_array_power<S: Scalar>(&self, t_seconds: f64, r_au: S) -> Result<S> {
        Ok(self.phi(r_au)? * (self.psi(t_seconds) * self.p0_bol))
    }

    pub fn bus_power<S: Scalar>(&self, r_au: S) -> Result<S> {
        if !(r_au.re() > 0.0) {
            return Err(CscError::Domain(format!("heliocentric distance {} <= 0", r_au.re())));
        }
        let [d1, d2, d3] = self.d_coeffs;
        let inv = r_au.recip();
        Ok(inv * (inv * d3 + d2) + d1)
    }

    /// Array output minus bus draw; may be negative.
    pub fn available_power<S: Scalar>(&self, t_seconds: f64, r_au: S) -> Result<S> {
        Ok(self.solar_array_power(t_seconds, r_au)? - self.bus_power(r_au)?)
    }

    /// Power the thruster may draw: available power floored at zero and capped if configured.
    pub fn max_thruster_power<S: Scalar>(&self, t_seconds: f64, r_au: S) -> Result<S> {
        let p = self.available_power(t_seconds, r_au)?;
        if p.re() <= 0.0 {
            return Ok(S::from_real(0.0));
        }
        match self.p_max_cap {
            Some(cap) if p.re() > cap => Ok(S::from_real(cap)),
            _ => Ok(p),
        }
    }
}

fn phi_coeffs<S: Scalar>(a: &[f64; 5], r: S) -> S {
    let inv = r.recip();
    let num = inv * (inv * a[2] + a[1]) + a[0];
    let den = r * (r * a[4] + a[3]) + 1.0;
    num / den * inv * inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const YEAR_S: f64 = SECONDS_PER_DAY * DAYS_PER_JULIAN_YEAR;

    fn benchmark() -> PowerModel {
        PowerModel::default()
    }

    #[test]
    fn phi_at_one_au() {
        let m = benchmark();
        assert_relative_eq!(m.phi(1.0).unwrap(), 1.096 / 1.095, max_relative = 1e-15);
        assert!(m.normalization_ok());
    }

    #[test]
    fn phi_inverse_square() {
        let m = PowerModel { a_coeffs: INVERSE_SQUARE_A, ..benchmark() };
        assert_relative_eq!(m.phi(2.0).unwrap(), 0.25, max_relative = 1e-16);
        for r in [0.3, 0.77, 1.0, 3.3, 40.0] {
            assert_relative_eq!(m.phi(r).unwrap(), 1.0 / (r * r), max_relative = 1e-15);
        }
    }

    #[test]
    fn phi_half_au() {
        // (1.321 - 0.216 - 0.468) / (1 + 0.054 - 0.00325) / 0.25
        let want = 0.637 / 1.05075 / 0.25;
        assert_relative_eq!(benchmark().phi(0.5).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn phi_rejects_nonpositive() {
        assert!(benchmark().phi(0.0).is_err());
        assert!(benchmark().bus_power(-1.0).is_err());
    }

    #[test]
    fn psi_values() {
        let m = benchmark();
        assert_eq!(m.psi(0.0), 1.0);
        assert_relative_eq!(m.psi(YEAR_S), 0.98, max_relative = 1e-14);
        let tau = 3543.0 / 365.25;
        assert_relative_eq!(m.psi(3543.0 * SECONDS_PER_DAY), 0.98_f64.powf(tau), max_relative = 1e-14);
        assert!((m.psi(3543.0 * SECONDS_PER_DAY) - 0.8221).abs() < 5e-4);
    }

    #[test]
    fn array_and_available_power() {
        let m = benchmark();
        let p = m.solar_array_power(0.0, 1.0).unwrap();
        assert!((p - 10_009.13).abs() < 0.01);
        assert!((m.available_power(0.0, 1.0).unwrap() - 9_609.13).abs() < 0.01);
        let inv = PowerModel { a_coeffs: INVERSE_SQUARE_A, ..benchmark() };
        assert_relative_eq!(inv.solar_array_power(0.0, 2.0).unwrap(), 2500.0, max_relative = 1e-15);
        for r in [0.4, 1.0, 2.2] {
            let gap = m.solar_array_power(0.0, r).unwrap() - m.available_power(0.0, r).unwrap();
            assert_relative_eq!(gap, 400.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn bus_power_values() {
        let m = benchmark();
        assert_eq!(m.bus_power(3.7).unwrap(), 400.0);
        let z = PowerModel { d_coeffs: [0.0; 3], ..benchmark() };
        assert_eq!(z.bus_power(3.7).unwrap(), 0.0);
        let d = PowerModel { d_coeffs: [100.0, 50.0, 25.0], ..benchmark() };
        assert_relative_eq!(d.bus_power(0.5).unwrap(), 300.0, max_relative = 1e-15);
    }

    #[test]
    fn fitted_curve_departs_inside_one_au() {
        let fit = benchmark();
        let inv = PowerModel { a_coeffs: INVERSE_SQUARE_A, ..benchmark() };
        let rel = |r: f64| (fit.phi(r).unwrap() - inv.phi(r).unwrap()).abs() / inv.phi(r).unwrap();
        assert!(rel(0.4) > 0.2);
        assert!(rel(0.6) > 0.1);
        for r in [1.2, 1.6, 2.2] {
            assert!(rel(r) < 0.08, "r = {r}: {}", rel(r));
        }
    }

    #[test]
    fn strict_decay() {
        let m = benchmark();
        let a = m.solar_array_power(1e7, 1.3).unwrap();
        let b = m.solar_array_power(2e7, 1.3).unwrap();
        assert!(b < a);
    }

    #[test]
    fn constant_distance_law() {
        let m = PowerModel { distance_dependent: false, ..benchmark() };
        assert_eq!(m.phi(3.0).unwrap(), 1.0);
    }
}
