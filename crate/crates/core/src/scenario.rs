//! Scenario files: TOML with fixed sections, unknown keys rejected.

use crate::bvp::{HomotopySchedule, PropagationTolerances, ShootingProblem, SolverConfig};
use crate::canonical::{cart_to_mee, CanonicalUnits, AU_KM, G0_M_S2, MU_SUN_KM3_S2};
use crate::control::{DirectionWindow, OperationalGates};
use crate::costate::CxConfig;
use crate::dynamics::{ForceModel, Perturbations};
use crate::engine::EngineModel;
use crate::ephemeris::{Body, Ephemeris, EphemerisSource, EphemerisTable, PerturbationForm};
use crate::error::{CscError, Result};
use crate::power::{PowerModel, BENCHMARK_A, INVERSE_SQUARE_A};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Launch epoch of the Earth–Dionysus benchmark, 2012-12-23 00:00 TDB.
pub const BENCHMARK_EPOCH_JD: f64 = 2_456_284.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub r0_km: [f64; 3],
    pub v0_kms: [f64; 3],
    pub rf_km: [f64; 3],
    pub vf_kms: [f64; 3],
    #[serde(default = "default_epoch")]
    pub epoch_jd: f64,
    pub tof_days: f64,
    pub m0_kg: f64,
}

fn default_epoch() -> f64 {
    BENCHMARK_EPOCH_JD
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub mu_sun_km3_s2: f64,
    pub au_km: f64,
    pub g0_m_s2: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { mu_sun_km3_s2: MU_SUN_KM3_S2, au_km: AU_KM, g0_m_s2: G0_M_S2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub eta: f64,
    pub isp_min_s: f64,
    pub isp_max_s: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { eta: 0.65, isp_min_s: 3000.0, isp_max_s: 6000.0 }
    }
}

/// Distance law of the array output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceLaw {
    /// Rational fit with the `a` coefficients.
    #[default]
    Fitted,
    InverseSquare,
    /// No distance dependence.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    pub p0_bol_w: f64,
    pub distance_law: DistanceLaw,
    pub a: [f64; 5],
    pub d_w: [f64; 3],
    pub sigma_per_year: f64,
    /// Overridden by the case preset when one is given.
    pub degradation: Option<bool>,
    pub p_ava_min_w: f64,
    pub p_max_cap_w: Option<f64>,
    /// Re-evaluate the power ceiling at the perturbed position in the costate equations.
    pub couple_distance: bool,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            p0_bol_w: 10_000.0,
            distance_law: DistanceLaw::Fitted,
            a: BENCHMARK_A,
            d_w: [400.0, 0.0, 0.0],
            sigma_per_year: 0.02,
            degradation: None,
            p_ava_min_w: 0.0,
            p_max_cap_w: None,
            couple_distance: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EphemerisMode {
    #[default]
    MeanElements,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    pub enabled: Option<bool>,
    pub bodies: Vec<String>,
    pub ephemeris: EphemerisMode,
    pub table_path: Option<PathBuf>,
    pub interp_order: usize,
    pub form: PerturbationForm,
    /// Smallest spacecraft–planet distance allowed, LU.
    pub min_distance_lu: f64,
    /// Planet μ overrides keyed by body name, km^3/s^2.
    pub mu_km3_s2: BTreeMap<String, f64>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            enabled: None,
            bodies: Body::ALL.iter().map(|b| b.name().to_string()).collect(),
            ephemeris: EphemerisMode::MeanElements,
            table_path: None,
            interp_order: 7,
            form: PerturbationForm::Standard,
            min_distance_lu: 1e-6,
            mu_km3_s2: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionWindowConfig {
    pub start_day: f64,
    pub end_day: f64,
    pub alpha: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GatesConfig {
    /// `[start_day, end_day]` pairs with the engine off.
    pub zero_thrust_days: Vec<[f64; 2]>,
    pub forced_direction: Vec<DirectionWindowConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostateConfig {
    pub gamma_c: f64,
    pub parallel: bool,
}

impl Default for CostateConfig {
    fn default() -> Self {
        let c = CxConfig::default();
        Self { gamma_c: c.gamma_c, parallel: c.parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmStart {
    pub nrev: u32,
    pub eta0: [f64; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Fixed revolution count; ignored when `nrev_range` is set.
    pub nrev: u32,
    pub nrev_range: Option<[u32; 2]>,
    /// Initial costates; multistart is used when absent.
    pub guess: Option<[f64; 7]>,
    /// Initial costates for specific revolution counts; take precedence over `guess`.
    pub warm_starts: Vec<WarmStart>,
    pub weights: [f64; 7],
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = PropagationTolerances::default();
        Self { nrev: 5, nrev_range: None, guess: None, warm_starts: Vec::new(), weights: [1.0; 7], rel_tol: t.rel_tol, abs_tol: t.abs_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// 1: constant power, two-body. 2: array degradation. 3: degradation and planets.
    pub case: Option<u8>,
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub perturbations: PerturbationConfig,
    #[serde(default)]
    pub gates: GatesConfig,
    #[serde(default)]
    pub homotopy: HomotopySchedule,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub costate: CostateConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative paths are resolved against; set by the loader.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Model flags implied by a case number: (array degradation, planetary perturbations).
pub fn case_flags(case: u8) -> Result<(bool, bool)> {
    match case {
        1 => Ok((false, false)),
        2 => Ok((true, false)),
        3 => Ok((true, true)),
        other => Err(CscError::Config(format!("case: expected 1, 2 or 3, got {other}"))),
    }
}

fn line_of(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn keyed(src: &str, key: &str, msg: &str) -> CscError {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    match line_of(src, leaf) {
        Some(n) => CscError::Config(format!("{key} (line {n}): {msg}")),
        None => CscError::Config(format!("{key}: {msg}")),
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(src).map_err(|e| CscError::Config(e.to_string()))?;
        cfg.apply_case(src)?;
        cfg.validate_with_source(src)?;
        Ok(cfg)
    }

    /// Resolve the case preset into explicit degradation and perturbation flags.
    fn apply_case(&mut self, src: &str) -> Result<()> {
        if let Some(case) = self.case {
            let (deg, pert) = case_flags(case).map_err(|_| keyed(src, "case", "expected 1, 2 or 3"))?;
            if self.power.degradation.is_some_and(|d| d != deg) {
                return Err(keyed(src, "power.degradation", &format!("conflicts with case {case}")));
            }
            if self.perturbations.enabled.is_some_and(|p| p != pert) {
                return Err(keyed(src, "perturbations.enabled", &format!("conflicts with case {case}")));
            }
            self.power.degradation = Some(deg);
            self.perturbations.enabled = Some(pert);
        }
        Ok(())
    }

    /// Switch to another case preset, replacing the model flags.
    pub fn set_case(&mut self, case: u8) -> Result<()> {
        let (deg, pert) = case_flags(case)?;
        self.case = Some(case);
        self.power.degradation = Some(deg);
        self.perturbations.enabled = Some(pert);
        Ok(())
    }

    pub fn degradation(&self) -> bool {
        self.power.degradation.unwrap_or(true)
    }

    pub fn perturbations_enabled(&self) -> bool {
        self.perturbations.enabled.unwrap_or(false)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_source("")
    }

    fn validate_with_source(&self, src: &str) -> Result<()> {
        let err = |key: &str, msg: &str| keyed(src, key, msg);
        let b = &self.boundary;
        if !(b.m0_kg > 0.0) {
            return Err(err("boundary.m0_kg", "must be positive"));
        }
        if !(b.tof_days > 0.0) {
            return Err(err("boundary.tof_days", "must be positive"));
        }
        for (k, v) in [("r0_km", &b.r0_km), ("v0_kms", &b.v0_kms), ("rf_km", &b.rf_km), ("vf_kms", &b.vf_kms)] {
            if v.iter().any(|c| !c.is_finite()) || v.iter().all(|c| *c == 0.0) {
                return Err(err(&format!("boundary.{k}"), "must be a finite non-zero vector"));
            }
        }
        let c = &self.constants;
        for (k, v) in [("mu_sun_km3_s2", c.mu_sun_km3_s2), ("au_km", c.au_km), ("g0_m_s2", c.g0_m_s2)] {
            if !(v > 0.0) {
                return Err(err(&format!("constants.{k}"), "must be positive"));
            }
        }
        let e = &self.engine;
        if !(e.eta > 0.0 && e.eta <= 1.0) {
            return Err(err("engine.eta", "must lie in (0, 1]"));
        }
        if !(e.isp_min_s > 0.0 && e.isp_min_s < e.isp_max_s) {
            return Err(err("engine.isp_min_s", "must satisfy 0 < isp_min_s < isp_max_s"));
        }
        let p = &self.power;
        if !(p.p0_bol_w > 0.0) {
            return Err(err("power.p0_bol_w", "must be positive"));
        }
        if !(0.0..1.0).contains(&p.sigma_per_year) {
            return Err(err("power.sigma_per_year", "must lie in [0, 1)"));
        }
        if p.p_max_cap_w.is_some_and(|v| !(v > 0.0)) {
            return Err(err("power.p_max_cap_w", "must be positive"));
        }
        if !(p.p_ava_min_w >= 0.0) {
            return Err(err("power.p_ava_min_w", "must be non-negative"));
        }
        let pt = &self.perturbations;
        for name in &pt.bodies {
            name.parse::<Body>().map_err(|_| err("perturbations.bodies", &format!("unknown body {name:?}")))?;
        }
        for name in pt.mu_km3_s2.keys() {
            name.parse::<Body>().map_err(|_| err("perturbations.mu_km3_s2", &format!("unknown body {name:?}")))?;
        }
        if self.perturbations_enabled() && pt.ephemeris == EphemerisMode::Table {
            match &pt.table_path {
                None => return Err(err("perturbations.table_path", "required when ephemeris = \"table\"")),
                Some(path) => {
                    let full = self.resolve(path);
                    if !full.is_file() {
                        return Err(err("perturbations.table_path", &format!("file {} does not exist", full.display())));
                    }
                }
            }
        }
        if !(pt.min_distance_lu > 0.0) {
            return Err(err("perturbations.min_distance_lu", "must be positive"));
        }
        for w in &self.gates.zero_thrust_days {
            if !(w[0] < w[1]) || w[0] < 0.0 || w[1] > b.tof_days {
                return Err(err("gates.zero_thrust_days", "windows must satisfy 0 <= start < end <= tof_days"));
            }
        }
        for w in &self.gates.forced_direction {
            if !(w.start_day < w.end_day) || w.start_day < 0.0 || w.end_day > b.tof_days {
                return Err(err("gates.forced_direction", "windows must satisfy 0 <= start_day < end_day <= tof_days"));
            }
            let n = (w.alpha.iter().map(|a| a * a).sum::<f64>()).sqrt();
            if (n - 1.0).abs() > 1e-9 {
                return Err(err("gates.forced_direction", "alpha must be a unit vector"));
            }
        }
        self.homotopy.validate().map_err(|e| err("homotopy", &strip(e)))?;
        self.solver.validate().map_err(|e| err("solver", &strip(e)))?;
        if !(self.costate.gamma_c > 0.0) {
            return Err(err("costate.gamma_c", "must be positive"));
        }
        let r = &self.run;
        if r.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(err("run.weights", "must all be positive"));
        }
        if r.guess.iter().chain(r.warm_starts.iter().map(|w| &w.eta0)).flatten().any(|v| !v.is_finite()) {
            return Err(err("run.guess", "costate guesses must be finite"));
        }
        if let Some([a, z]) = r.nrev_range {
            if a > z {
                return Err(err("run.nrev_range", "start must not exceed end"));
            }
        }
        PropagationTolerances { rel_tol: r.rel_tol, abs_tol: r.abs_tol }
            .options()
            .validate()
            .map_err(|e| err("run.rel_tol", &strip(e)))?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn units(&self) -> CanonicalUnits {
        CanonicalUnits::new(self.constants.au_km, self.constants.mu_sun_km3_s2, self.boundary.m0_kg)
    }

    pub fn power_model(&self) -> PowerModel {
        let p = &self.power;
        let (a, distance_dependent) = match p.distance_law {
            DistanceLaw::Fitted => (p.a, true),
            DistanceLaw::InverseSquare => (INVERSE_SQUARE_A, true),
            DistanceLaw::Constant => (p.a, false),
        };
        PowerModel {
            p0_bol: p.p0_bol_w,
            a_coeffs: a,
            sigma: if self.degradation() { p.sigma_per_year } else { 0.0 },
            d_coeffs: p.d_w,
            p_ava_min: p.p_ava_min_w,
            distance_dependent,
            p_max_cap: p.p_max_cap_w,
        }
    }

    pub fn engine_model(&self) -> EngineModel {
        let e = &self.engine;
        let p_max = self.power.p_max_cap_w.unwrap_or(f64::MAX);
        EngineModel::from_isp(e.eta, e.isp_min_s, e.isp_max_s, self.constants.g0_m_s2, p_max)
    }

    pub fn bodies(&self) -> Vec<Body> {
        self.perturbations.bodies.iter().filter_map(|b| b.parse().ok()).collect()
    }

    pub fn ephemeris(&self) -> Result<Ephemeris> {
        let pt = &self.perturbations;
        let source = match pt.ephemeris {
            EphemerisMode::MeanElements => EphemerisSource::mean_elements(),
            EphemerisMode::Table => {
                let path = pt.table_path.as_ref().ok_or_else(|| CscError::Config("perturbations.table_path: missing".into()))?;
                EphemerisSource::Table(EphemerisTable::from_csv_path(&self.resolve(path), pt.interp_order)?)
            }
        };
        let mut eph = Ephemeris::new(source, self.units(), self.constants.au_km, self.constants.mu_sun_km3_s2, self.boundary.epoch_jd);
        for (k, v) in &pt.mu_km3_s2 {
            eph.mu_overrides.insert(k.parse().map_err(|_| CscError::Config(format!("perturbations.mu_km3_s2: unknown body {k:?}")))?, *v);
        }
        Ok(eph)
    }

    pub fn force_model(&self) -> Result<ForceModel> {
        let units = self.units();
        let perturbations = if self.perturbations_enabled() {
            Some(Perturbations {
                ephemeris: self.ephemeris()?,
                bodies: self.bodies(),
                form: self.perturbations.form,
                floor: self.perturbations.min_distance_lu,
            })
        } else {
            None
        };
        Ok(ForceModel {
            units,
            engine: self.engine_model().to_canonical(&units),
            power: self.power_model(),
            perturbations,
            power_coupling: self.power.couple_distance,
        })
    }

    pub fn gates(&self) -> OperationalGates {
        let u = self.units();
        OperationalGates {
            zero_thrust_windows: self.gates.zero_thrust_days.iter().map(|w| (u.days_to_tu(w[0]), u.days_to_tu(w[1]))).collect(),
            forced_direction_windows: self
                .gates
                .forced_direction
                .iter()
                .map(|w| DirectionWindow {
                    t_lower: u.days_to_tu(w.start_day),
                    t_upper: u.days_to_tu(w.end_day),
                    alpha_desired: w.alpha,
                })
                .collect(),
            p_ava_min: self.power.p_ava_min_w,
        }
    }

    /// Revolution counts to try.
    pub fn nrevs(&self) -> Vec<u32> {
        match self.run.nrev_range {
            Some([a, b]) => (a..=b).collect(),
            None => vec![self.run.nrev],
        }
    }

    /// First-stage costates for revolution count `n`.
    pub fn guess_for(&self, n: u32) -> Option<[f64; 7]> {
        self.run.warm_starts.iter().find(|w| w.nrev == n).map(|w| w.eta0).or(self.run.guess)
    }

    /// Shooting problem at the first smoothing level of the schedule.
    pub fn problem(&self) -> Result<ShootingProblem> {
        let u = self.units();
        let mu = u.mu();
        let b = &self.boundary;
        let r = |v: &[f64; 3]| v.map(|c| u.km_to_lu(c));
        let v = |w: &[f64; 3]| w.map(|c| u.kms_to_vu(c));
        let x0 = cart_to_mee(&r(&b.r0_km), &v(&b.v0_kms), mu).map_err(|e| CscError::Config(format!("boundary.r0_km/v0_kms: {e}")))?;
        let target = cart_to_mee(&r(&b.rf_km), &v(&b.vf_kms), mu).map_err(|e| CscError::Config(format!("boundary.rf_km/vf_kms: {e}")))?;
        let problem = ShootingProblem {
            model: self.force_model()?,
            gates: self.gates(),
            rho: self.homotopy.params(self.homotopy.rho_start),
            x0,
            m0: 1.0,
            target,
            nrev: self.run.nrev,
            t0: 0.0,
            tf: u.days_to_tu(b.tof_days),
            weights: self.run.weights,
            tolerances: PropagationTolerances { rel_tol: self.run.rel_tol, abs_tol: self.run.abs_tol },
            cx: CxConfig { gamma_c: self.costate.gamma_c, parallel: self.costate.parallel },
        };
        problem.validate()?;
        Ok(problem)
    }
}

fn strip(e: CscError) -> String {
    match e {
        CscError::Config(s) | CscError::Domain(s) => s,
        other => other.to_string(),
    }
}

/// Read, parse and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| CscError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let mut cfg: ScenarioConfig = toml::from_str(&src).map_err(|e| CscError::Config(format!("{}: {e}", path.display())))?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.apply_case(&src)?;
    cfg.validate_with_source(&src)?;
    Ok(cfg)
}

/// The Earth–Dionysus benchmark for one of the three cases.
pub fn benchmark(case: u8) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig {
        name: format!("dionysus_case{case}"),
        case: None,
        boundary: BoundaryConfig {
            r0_km: [-4_561_588.650_060_29, 147_076_954.664_376, -2_259.945_924_361_79],
            v0_kms: [-30.265_097_988_218_2, -0.848_685_467_901_138, 5.053_036_062_815_63e-5],
            rf_km: [-305_026_788.667_814, 307_051_467.941_918, 82_899_899.568_219_3],
            vf_kms: [-4.238_726_569_780_66, -13.436_307_899_221, 0.565_362_569_286_115],
            epoch_jd: BENCHMARK_EPOCH_JD,
            tof_days: 3543.0,
            m0_kg: 4000.0,
        },
        constants: ConstantsConfig::default(),
        engine: EngineConfig::default(),
        power: PowerConfig::default(),
        perturbations: PerturbationConfig::default(),
        gates: GatesConfig::default(),
        homotopy: HomotopySchedule::default(),
        solver: SolverConfig::default(),
        costate: CostateConfig::default(),
        run: RunConfig::default(),
        output: OutputConfig::default(),
        base_dir: PathBuf::new(),
    };
    cfg.set_case(case)?;
    cfg.validate()?;
    Ok(cfg)
}
