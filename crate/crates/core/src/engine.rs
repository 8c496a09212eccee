//! Variable-Isp, variable-thrust engine map.
//!
//! The formulas are unit-agnostic: any consistent (power, velocity, force)
//! system works, which is how the solver uses the same model in canonical units.

use crate::canonical::{CanonicalUnits, G0_M_S2};
use crate::error::{CscError, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineModel {
    pub eta: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl EngineModel {
    /// Engine in SI units from an Isp range in seconds.
    pub fn from_isp(eta: f64, isp_min: f64, isp_max: f64, g0: f64, p_max_w: f64) -> Self {
        Self {
            eta,
            c_min: isp_min * g0,
            c_max: isp_max * g0,
            p_min: 0.0,
            p_max: p_max_w,
        }
    }

    /// 0.65 efficiency, Isp in [3000, 6000] s, 10 kW ceiling.
    pub fn benchmark() -> Self {
        Self::from_isp(0.65, 3000.0, 6000.0, G0_M_S2, 10_000.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(CscError::Config("engine.eta must lie in (0, 1]".into()));
        }
        if !(self.c_min > 0.0 && self.c_min < self.c_max) {
            return Err(CscError::Config("engine exhaust-velocity bounds must satisfy 0 < c_min < c_max".into()));
        }
        if !(self.p_min >= 0.0 && self.p_min < self.p_max) {
            return Err(CscError::Config("engine power bounds must satisfy 0 <= p_min < p_max".into()));
        }
        Ok(())
    }

    /// Same engine expressed in canonical units (velocities in LU/TU, power in canonical power units).
    pub fn to_canonical(&self, units: &CanonicalUnits) -> Self {
        let vu = units.velocity_unit();
        let pu = units.power_unit();
        Self {
            eta: self.eta,
            c_min: self.c_min / vu,
            c_max: self.c_max / vu,
            p_min: self.p_min / pu,
            p_max: self.p_max / pu,
        }
    }

    pub fn thrust_magnitude(&self, power: f64, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(CscError::Domain(format!("exhaust velocity {c} <= 0")));
        }
        Ok(self.thrust_generic(power, c))
    }

    pub fn mass_flow_rate(&self, power: f64, c: f64) -> Result<f64> {
        if !(c > 0.0) {
            return Err(CscError::Domain(format!("exhaust velocity {c} <= 0")));
        }
        Ok(self.mass_flow_generic(power, c))
    }

    #[inline]
    pub fn thrust_generic<S: Scalar>(&self, power: S, c: S) -> S {
        power * (2.0 * self.eta) / c
    }

    #[inline]
    pub fn mass_flow_generic<S: Scalar>(&self, power: S, c: S) -> S {
        -(power * (2.0 * self.eta)) / (c * c)
    }
}
