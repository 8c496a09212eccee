//! Canonical scaling, Cartesian/equinoctial conversions and the LVLH frame.

use crate::error::{CscError, Result};
use crate::scalar::{cross, dot, norm, scale, Scalar, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Sun gravitational parameter, km^3/s^2.
pub const MU_SUN_KM3_S2: f64 = 1.327_124_400_18e11;
/// Astronomical unit, km.
pub const AU_KM: f64 = 1.495_978_707e8;
/// Standard gravity, m/s^2.
pub const G0_M_S2: f64 = 9.806_65;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_JULIAN_YEAR: f64 = 365.25;

/// Nondimensionalization with 1 LU = 1 AU, μ_sun = 1 LU³/TU², 1 MU = m0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalUnits {
    /// Meters per LU.
    pub length_unit: f64,
    /// Seconds per TU.
    pub time_unit: f64,
    /// Kilograms per MU.
    pub mass_unit: f64,
    /// Sun gravitational parameter in m^3/s^2 used to derive the time unit.
    pub mu_sun_si: f64,
}

impl CanonicalUnits {
    pub fn new(au_km: f64, mu_sun_km3_s2: f64, mass_kg: f64) -> Self {
        let length_unit = au_km * 1e3;
        let mu_sun_si = mu_sun_km3_s2 * 1e9;
        let time_unit = (length_unit.powi(3) / mu_sun_si).sqrt();
        Self {
            length_unit,
            time_unit,
            mass_unit: mass_kg,
            mu_sun_si,
        }
    }

    /// Default constants with the given mass unit.
    pub fn heliocentric(mass_kg: f64) -> Self {
        Self::new(AU_KM, MU_SUN_KM3_S2, mass_kg)
    }

    /// μ_sun in canonical units (1 up to roundoff).
    pub fn mu(&self) -> f64 {
        self.mu_sun_si * self.time_unit.powi(2) / self.length_unit.powi(3)
    }

    pub fn velocity_unit(&self) -> f64 {
        self.length_unit / self.time_unit
    }

    pub fn acceleration_unit(&self) -> f64 {
        self.length_unit / self.time_unit.powi(2)
    }

    pub fn force_unit(&self) -> f64 {
        self.mass_unit * self.acceleration_unit()
    }

    /// Watts per canonical power unit.
    pub fn power_unit(&self) -> f64 {
        self.force_unit() * self.velocity_unit()
    }

    pub fn days_to_tu(&self, days: f64) -> f64 {
        days * SECONDS_PER_DAY / self.time_unit
    }

    pub fn tu_to_days(&self, tu: f64) -> f64 {
        tu * self.time_unit / SECONDS_PER_DAY
    }

    pub fn km_to_lu(&self, km: f64) -> f64 {
        km * 1e3 / self.length_unit
    }

    pub fn lu_to_km(&self, lu: f64) -> f64 {
        lu * self.length_unit / 1e3
    }

    pub fn kms_to_vu(&self, kms: f64) -> f64 {
        kms * 1e3 / self.velocity_unit()
    }

    pub fn vu_to_kms(&self, vu: f64) -> f64 {
        vu * self.velocity_unit() / 1e3
    }

    /// km^3/s^2 to LU^3/TU^2.
    pub fn mu_to_canonical(&self, mu_km3_s2: f64) -> f64 {
        mu_km3_s2 * 1e9 * self.time_unit.powi(2) / self.length_unit.powi(3)
    }
}

/// Modified equinoctial elements. `l` is the unwrapped true longitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeeState {
    pub p: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
    pub l: f64,
}

impl MeeState {
    pub fn new(p: f64, f: f64, g: f64, h: f64, k: f64, l: f64) -> Self {
        Self { p, f, g, h, k, l }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.p, self.f, self.g, self.h, self.k, self.l]
    }

    pub fn from_array(a: &[f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn w(&self) -> f64 {
        1.0 + self.f * self.l.cos() + self.g * self.l.sin()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(CscError::Domain(format!("semi-latus rectum {} <= 0", self.p)));
        }
        if !(self.w() > 0.0) {
            return Err(CscError::Domain("1 + f cos l + g sin l <= 0".into()));
        }
        Ok(())
    }

    pub fn eccentricity(&self) -> f64 {
        self.f.hypot(self.g)
    }

    /// Osculating true anomaly in [0, 2π).
    pub fn true_anomaly(&self) -> f64 {
        let peri = self.g.atan2(self.f);
        (self.l - peri).rem_euclid(TAU)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub r: Vec3<f64>,
    pub v: Vec3<f64>,
}

impl CartesianState {
    pub fn new(r: Vec3<f64>, v: Vec3<f64>) -> Self {
        Self { r, v }
    }
}

/// Cartesian state to equinoctial elements; `l` lands in [0, 2π).
pub fn cart_to_mee(r: &Vec3<f64>, v: &Vec3<f64>, mu: f64) -> Result<MeeState> {
    let rmag = norm(r);
    if !(rmag > 0.0) {
        return Err(CscError::Domain("zero position vector".into()));
    }
    let hvec = cross(r, v);
    let hmag = norm(&hvec);
    if hmag <= 1e-14 * rmag * norm(v).max(f64::MIN_POSITIVE) {
        return Err(CscError::Domain("rectilinear orbit".into()));
    }
    let hhat = scale(&hvec, 1.0 / hmag);
    if hhat[2] <= -1.0 + 1e-12 {
        return Err(CscError::Domain("retrograde equatorial orbit (i = 180 deg)".into()));
    }
    let p = hmag * hmag / mu;
    let h = -hhat[1] / (1.0 + hhat[2]);
    let k = hhat[0] / (1.0 + hhat[2]);
    let s2 = 1.0 + h * h + k * k;
    let fhat = [(1.0 - k * k + h * h) / s2, 2.0 * k * h / s2, -2.0 * k / s2];
    let ghat = [2.0 * k * h / s2, (1.0 + k * k - h * h) / s2, 2.0 * h / s2];
    let vxh = cross(v, &hvec);
    let evec = [
        vxh[0] / mu - r[0] / rmag,
        vxh[1] / mu - r[1] / rmag,
        vxh[2] / mu - r[2] / rmag,
    ];
    let f = dot(&evec, &fhat);
    let g = dot(&evec, &ghat);
    let l = dot(r, &ghat).atan2(dot(r, &fhat)).rem_euclid(TAU);
    Ok(MeeState { p, f, g, h, k, l })
}

/// Equinoctial elements to Cartesian position and velocity, generic over the scalar field.
pub fn mee_to_cart_generic<S: Scalar>(x: &[S; 6], mu: f64) -> (Vec3<S>, Vec3<S>) {
    let [p, f, g, h, k, l] = *x;
    let (sl, cl) = (l.sin(), l.cos());
    let alpha2 = h * h - k * k;
    let s2 = h * h + k * k + 1.0;
    let w = f * cl + g * sl + 1.0;
    let r = p / w;
    let hk2 = h * k * 2.0;
    let rs = r / s2;
    let pos = [
        rs * (cl + alpha2 * cl + hk2 * sl),
        rs * (sl - alpha2 * sl + hk2 * cl),
        rs * (h * sl - k * cl) * 2.0,
    ];
    let smp = (p.recip() * mu).sqrt() / s2;
    let vel = [
        -smp * (sl + alpha2 * sl - hk2 * cl + g - f * hk2 + alpha2 * g),
        -smp * (-cl + alpha2 * cl + hk2 * sl - f + g * hk2 + alpha2 * f),
        smp * (h * cl + k * sl + f * h + g * k) * 2.0,
    ];
    (pos, vel)
}

pub fn mee_to_cart(x: &MeeState, mu: f64) -> CartesianState {
    let (r, v) = mee_to_cart_generic(&x.to_array(), mu);
    CartesianState { r, v }
}

/// Rows are û_r, û_t, û_h, generic over the scalar field. No degeneracy check.
pub fn lvlh_rotation_generic<S: Scalar>(r: &Vec3<S>, v: &Vec3<S>) -> [Vec3<S>; 3] {
    let ur = scale(r, norm(r).recip());
    let hv = cross(r, v);
    let uh = scale(&hv, norm(&hv).recip());
    let ut = cross(&uh, &ur);
    [ur, ut, uh]
}

/// Inertial-to-LVLH direction cosine matrix.
pub fn lvlh_rotation(r: &Vec3<f64>, v: &Vec3<f64>) -> Result<[Vec3<f64>; 3]> {
    let rm = norm(r);
    let hm = norm(&cross(r, v));
    if !(rm > 0.0) || hm <= 1e-14 * rm * norm(v) || hm == 0.0 {
        return Err(CscError::Domain("LVLH frame undefined for rectilinear state".into()));
    }
    Ok(lvlh_rotation_generic(r, v))
}

pub fn rotate<S: Scalar>(m: &[Vec3<S>; 3], a: &Vec3<S>) -> Vec3<S> {
    [dot(&m[0], a), dot(&m[1], a), dot(&m[2], a)]
}
