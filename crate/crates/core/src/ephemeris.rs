//! Planetary positions and the secondary-body perturbing acceleration.
//!
//! The default source is the JPL approximate mean-element set (J2000 ecliptic,
//! linear per-century rates, valid 1800–2050). A CSV state table with
//! Lagrange interpolation can replace it for higher fidelity.

use crate::canonical::{lvlh_rotation_generic, rotate, CanonicalUnits, CartesianState, SECONDS_PER_DAY};
use crate::error::{CscError, Result};
use crate::scalar::{dot, lift, Scalar, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub const J2000_JD: f64 = 2_451_545.0;
pub const DAYS_PER_CENTURY: f64 = 36_525.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Body {
    Mercury,
    Venus,
    Earth,
    Mars,
    Jupiter,
    Saturn,
    Uranus,
    Neptune,
}

impl Body {
    pub const ALL: [Body; 8] = [
        Body::Mercury,
        Body::Venus,
        Body::Earth,
        Body::Mars,
        Body::Jupiter,
        Body::Saturn,
        Body::Uranus,
        Body::Neptune,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Body::Mercury => "mercury",
            Body::Venus => "venus",
            Body::Earth => "earth",
            Body::Mars => "mars",
            Body::Jupiter => "jupiter",
            Body::Saturn => "saturn",
            Body::Uranus => "uranus",
            Body::Neptune => "neptune",
        }
    }

    /// Gravitational parameter of the planet (system), km^3/s^2.
    pub fn default_mu(&self) -> f64 {
        match self {
            Body::Mercury => 22_031.78,
            Body::Venus => 324_858.592,
            // Earth-Moon system, matching the barycentric mean elements.
            Body::Earth => 403_503.235_5,
            Body::Mars => 42_828.375_214,
            Body::Jupiter => 126_712_764.1,
            Body::Saturn => 37_940_584.841_8,
            Body::Uranus => 5_794_556.4,
            Body::Neptune => 6_836_527.100_58,
        }
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Body {
    type Err = CscError;
    fn from_str(s: &str) -> Result<Self> {
        Body::ALL
            .iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| CscError::Ephemeris(format!("unknown body '{s}'")))
    }
}

/// Mean elements: a (AU), e, I (deg), mean longitude L (deg),
/// longitude of perihelion ϖ (deg), longitude of node Ω (deg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanetModel {
    pub mu: f64,
    pub elements_j2000: [f64; 6],
    pub rates: [f64; 6],
}

impl PlanetModel {
    pub fn standard(body: Body) -> Self {
        let (elements_j2000, rates) = match body {
            Body::Mercury => (
                [0.387_099_27, 0.205_635_93, 7.004_979_02, 252.250_323_50, 77.457_796_28, 48.330_765_93],
                [0.000_000_37, 0.000_019_06, -0.005_947_49, 149_472.674_111_75, 0.160_476_89, -0.125_340_81],
            ),
            Body::Venus => (
                [0.723_335_66, 0.006_776_72, 3.394_676_05, 181.979_099_50, 131.602_467_18, 76.679_842_55],
                [0.000_003_90, -0.000_041_07, -0.000_788_90, 58_517.815_387_29, 0.002_683_29, -0.277_694_18],
            ),
            Body::Earth => (
                [1.000_002_61, 0.016_711_23, -0.000_015_31, 100.464_571_66, 102.937_681_93, 0.0],
                [0.000_005_62, -0.000_043_92, -0.012_946_68, 35_999.372_449_81, 0.323_273_64, 0.0],
            ),
            Body::Mars => (
                [1.523_710_34, 0.093_394_10, 1.849_691_42, -4.553_432_05, -23.943_629_59, 49.559_538_91],
                [0.000_018_47, 0.000_078_82, -0.008_131_31, 19_140.302_684_99, 0.444_410_88, -0.292_573_43],
            ),
            Body::Jupiter => (
                [5.202_887_00, 0.048_386_24, 1.304_396_95, 34.396_440_51, 14.728_479_83, 100.473_909_09],
                [-0.000_116_07, -0.000_132_53, -0.001_837_14, 3_034.746_127_75, 0.212_526_68, 0.204_691_06],
            ),
            Body::Saturn => (
                [9.536_675_94, 0.053_861_79, 2.485_991_87, 49.954_244_23, 92.598_878_31, 113.662_424_48],
                [-0.001_250_60, -0.000_509_91, 0.001_936_09, 1_222.493_622_01, -0.418_972_16, -0.288_677_94],
            ),
            Body::Uranus => (
                [19.189_164_64, 0.047_257_44, 0.772_637_83, 313.238_104_51, 170.954_276_30, 74.016_925_03],
                [-0.001_961_76, -0.000_043_97, -0.002_429_39, 428.482_027_85, 0.408_052_81, 0.042_405_89],
            ),
            Body::Neptune => (
                [30.069_922_76, 0.008_590_48, 1.770_043_47, -55.120_029_69, 44.964_762_27, 131.784_225_74],
                [0.000_262_91, 0.000_051_05, 0.000_353_72, 218.459_453_25, -0.322_414_64, -0.005_086_64],
            ),
        };
        Self { mu: body.default_mu(), elements_j2000, rates }
    }

    /// Heliocentric ecliptic-J2000 state (km, km/s) at Julian date `jd`.
    pub fn state_at(&self, jd: f64, mu_sun_km3_s2: f64, au_km: f64) -> CartesianState {
        let tc = (jd - J2000_JD) / DAYS_PER_CENTURY;
        let el: Vec<f64> = (0..6).map(|i| self.elements_j2000[i] + self.rates[i] * tc).collect();
        let (a_au, e) = (el[0], el[1]);
        let (inc, lmean, lperi, node) = (el[2].to_radians(), el[3].to_radians(), el[4].to_radians(), el[5].to_radians());
        let argp = lperi - node;
        let m = (lmean - lperi).rem_euclid(TAU);
        let ea = solve_kepler(m, e);
        let a = a_au * au_km;
        let mu = mu_sun_km3_s2 + self.mu;
        let n = (mu / a.powi(3)).sqrt();
        let (se, ce) = ea.sin_cos();
        let b = (1.0 - e * e).sqrt();
        let edot = n / (1.0 - e * ce);
        let xp = a * (ce - e);
        let yp = a * b * se;
        let vxp = -a * se * edot;
        let vyp = a * b * ce * edot;
        let (so, co) = argp.sin_cos();
        let (sn, cn) = node.sin_cos();
        let (si, ci) = inc.sin_cos();
        let rot = |x: f64, y: f64| -> Vec3<f64> {
            let xo = co * x - so * y;
            let yo = so * x + co * y;
            [cn * xo - sn * ci * yo, sn * xo + cn * ci * yo, si * yo]
        };
        CartesianState { r: rot(xp, yp), v: rot(vxp, vyp) }
    }
}

/// Eccentric anomaly from mean anomaly by Newton iteration.
pub fn solve_kepler(m: f64, e: f64) -> f64 {
    let mut ea = if e < 0.8 { m } else { std::f64::consts::PI };
    for _ in 0..50 {
        let f = ea - e * ea.sin() - m;
        let d = f / (1.0 - e * ea.cos());
        ea -= d;
        if d.abs() < 1e-15 {
            break;
        }
    }
    ea
}

#[derive(Debug, Clone, Deserialize)]
struct TableRow {
    epoch_jd: f64,
    body: String,
    x_km: f64,
    y_km: f64,
    z_km: f64,
    vx_kms: f64,
    vy_kms: f64,
    vz_kms: f64,
}

/// Tabulated heliocentric states per body, interpolated with Lagrange polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct EphemerisTable {
    pub epochs: BTreeMap<Body, Vec<f64>>,
    pub states: BTreeMap<Body, Vec<[f64; 6]>>,
    pub interp_order: usize,
}

impl EphemerisTable {
    pub fn from_csv_path(path: &Path, interp_order: usize) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| CscError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_reader(file, interp_order)
    }

    pub fn from_reader<R: std::io::Read>(reader: R, interp_order: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut epochs: BTreeMap<Body, Vec<f64>> = BTreeMap::new();
        let mut states: BTreeMap<Body, Vec<[f64; 6]>> = BTreeMap::new();
        for row in rdr.deserialize::<TableRow>() {
            let row = row.map_err(|e| CscError::Ephemeris(format!("table parse: {e}")))?;
            let body: Body = row.body.parse()?;
            epochs.entry(body).or_default().push(row.epoch_jd);
            states
                .entry(body)
                .or_default()
                .push([row.x_km, row.y_km, row.z_km, row.vx_kms, row.vy_kms, row.vz_kms]);
        }
        Self::new(epochs, states, interp_order)
    }

    pub fn new(epochs: BTreeMap<Body, Vec<f64>>, states: BTreeMap<Body, Vec<[f64; 6]>>, interp_order: usize) -> Result<Self> {
        if interp_order < 2 {
            return Err(CscError::Ephemeris("interpolation order must be at least 2".into()));
        }
        for (body, ep) in &epochs {
            if ep.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CscError::Ephemeris(format!("epochs for {body} are not strictly increasing")));
            }
            if ep.len() < interp_order + 1 {
                return Err(CscError::Ephemeris(format!(
                    "{body}: {} support points cannot carry order {interp_order}",
                    ep.len()
                )));
            }
        }
        Ok(Self { epochs, states, interp_order })
    }

    pub fn state_at(&self, body: Body, jd: f64) -> Result<CartesianState> {
        let ep = self
            .epochs
            .get(&body)
            .ok_or_else(|| CscError::Ephemeris(format!("body {body} not in table")))?;
        let st = &self.states[&body];
        let (lo, hi) = (ep[0], ep[ep.len() - 1]);
        if !(jd >= lo && jd <= hi) {
            return Err(CscError::Ephemeris(format!("epoch {jd} outside table range [{lo}, {hi}]")));
        }
        let nearest = match ep.binary_search_by(|x| x.partial_cmp(&jd).unwrap()) {
            Ok(i) => {
                let s = st[i];
                return Ok(CartesianState { r: [s[0], s[1], s[2]], v: [s[3], s[4], s[5]] });
            }
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= ep.len() || (jd - ep[i - 1]) <= (ep[i] - jd) {
                    i - 1
                } else {
                    i
                }
            }
        };
        let npts = self.interp_order + 1;
        let half = npts / 2;
        let start = nearest.saturating_sub(half).min(ep.len() - npts);
        let idx: Vec<usize> = (start..start + npts).collect();
        let mut out = [0.0; 6];
        for &i in &idx {
            let mut w = 1.0;
            for &j in &idx {
                if i != j {
                    w *= (jd - ep[j]) / (ep[i] - ep[j]);
                }
            }
            for c in 0..6 {
                out[c] += w * st[i][c];
            }
        }
        Ok(CartesianState { r: [out[0], out[1], out[2]], v: [out[3], out[4], out[5]] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EphemerisSource {
    MeanElements(BTreeMap<Body, PlanetModel>),
    Table(EphemerisTable),
}

impl EphemerisSource {
    pub fn mean_elements() -> Self {
        EphemerisSource::MeanElements(Body::ALL.iter().map(|&b| (b, PlanetModel::standard(b))).collect())
    }
}

/// Sign layout of the third-body term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationForm {
    /// μ_j [(r_j − r)/|r_j − r|³ − r_j/|r_j|³].
    #[default]
    Standard,
    /// −μ_j [r/|r|³ + (r − r_j)/|r − r_j|³], taken literally with heliocentric r.
    AsPrinted,
}

/// Planet positions and parameters evaluated at one instant, in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct BodySnapshot {
    pub body: Body,
    pub mu: f64,
    pub r: Vec3<f64>,
}

/// Ephemeris bound to a launch epoch and canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Ephemeris {
    pub source: EphemerisSource,
    pub units: CanonicalUnits,
    pub au_km: f64,
    pub mu_sun_km3_s2: f64,
    /// Julian date (TDB) of t = 0.
    pub epoch0_jd: f64,
    /// Planet μ overrides, km^3/s^2.
    pub mu_overrides: BTreeMap<Body, f64>,
}

impl Ephemeris {
    pub fn new(source: EphemerisSource, units: CanonicalUnits, au_km: f64, mu_sun_km3_s2: f64, epoch0_jd: f64) -> Self {
        Self { source, units, au_km, mu_sun_km3_s2, epoch0_jd, mu_overrides: BTreeMap::new() }
    }

    pub fn mu_km3_s2(&self, body: Body) -> f64 {
        if let Some(m) = self.mu_overrides.get(&body) {
            return *m;
        }
        match &self.source {
            EphemerisSource::MeanElements(map) => map.get(&body).map(|p| p.mu).unwrap_or(body.default_mu()),
            EphemerisSource::Table(_) => body.default_mu(),
        }
    }

    /// Heliocentric state (km, km/s) at a Julian date.
    pub fn planet_state(&self, body: Body, jd: f64) -> Result<CartesianState> {
        match &self.source {
            EphemerisSource::MeanElements(map) => {
                let pm = map.get(&body).ok_or_else(|| CscError::Ephemeris(format!("unknown body {body}")))?;
                if !(2_378_497.0..=2_470_172.0).contains(&jd) {
                    return Err(CscError::Ephemeris(format!("epoch {jd} outside mean-element validity (1800-2050)")));
                }
                Ok(pm.state_at(jd, self.mu_sun_km3_s2, self.au_km))
            }
            EphemerisSource::Table(t) => t.state_at(body, jd),
        }
    }

    pub fn jd_at(&self, t_tu: f64) -> f64 {
        self.epoch0_jd + t_tu * self.units.time_unit / SECONDS_PER_DAY
    }

    /// Positions (LU) and μ (canonical) of the requested bodies at canonical time `t_tu`.
    pub fn snapshot(&self, bodies: &[Body], t_tu: f64) -> Result<Vec<BodySnapshot>> {
        let jd = self.jd_at(t_tu);
        bodies
            .iter()
            .map(|&b| {
                let s = self.planet_state(b, jd)?;
                Ok(BodySnapshot {
                    body: b,
                    mu: self.units.mu_to_canonical(self.mu_km3_s2(b)),
                    r: [self.units.km_to_lu(s.r[0]), self.units.km_to_lu(s.r[1]), self.units.km_to_lu(s.r[2])],
                })
            })
            .collect()
    }
}

/// Inertial third-body acceleration from a set of body snapshots.
pub fn third_body_accel_inertial<S: Scalar>(
    r_sc: &Vec3<S>,
    bodies: &[BodySnapshot],
    form: PerturbationForm,
    floor: f64,
) -> Result<Vec3<S>> {
    let mut acc = [S::from_real(0.0); 3];
    for b in bodies {
        let rj: Vec3<S> = lift(&b.r);
        let d = [rj[0] - r_sc[0], rj[1] - r_sc[1], rj[2] - r_sc[2]];
        let d2 = dot(&d, &d);
        if d2.re().sqrt() < floor {
            return Err(CscError::Domain(format!("spacecraft within {floor:e} LU of {}", b.body)));
        }
        let inv_d3 = (d2 * d2 * d2).sqrt().recip();
        match form {
            PerturbationForm::Standard => {
                let rj3 = dot(&b.r, &b.r).powf(1.5);
                for i in 0..3 {
                    acc[i] = acc[i] + (d[i] * inv_d3 - b.r[i] / rj3) * b.mu;
                }
            }
            PerturbationForm::AsPrinted => {
                let r2 = dot(r_sc, r_sc);
                let inv_r3 = (r2 * r2 * r2).sqrt().recip();
                for i in 0..3 {
                    acc[i] = acc[i] - (r_sc[i] * inv_r3 - d[i] * inv_d3) * b.mu;
                }
            }
        }
    }
    Ok(acc)
}

/// Third-body acceleration rotated into LVLH (radial, transverse, normal).
pub fn secondary_body_accel<S: Scalar>(
    r_sc: &Vec3<S>,
    v_sc: &Vec3<S>,
    bodies: &[BodySnapshot],
    form: PerturbationForm,
    floor: f64,
) -> Result<Vec3<S>> {
    if bodies.is_empty() {
        return Ok([S::from_real(0.0); 3]);
    }
    let a = third_body_accel_inertial(r_sc, bodies, form, floor)?;
    let c = lvlh_rotation_generic(r_sc, v_sc);
    Ok(rotate(&c, &a))
}
