//! Result files: trajectory table, run summary and plot-data tables.

use crate::bvp::{StageRecord, Trajectory, TrajectorySample};
use crate::canonical::mee_to_cart;
use crate::dynamics::ForceModel;
use crate::ephemeris::third_body_accel_inertial;
use crate::error::{CscError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Trajectory table columns, in order.
pub const TRAJECTORY_COLUMNS: [&str; 23] = [
    "t_days", "p", "f", "g", "h", "k", "l", "m_kg", "x_km", "y_km", "z_km", "vx", "vy", "vz", "T_N", "Isp_s", "P_W", "S",
    "eps_deg", "delta_deg", "P_SA_W", "P_ava_W", "eps_raw_deg",
];

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const THRUST_FILE: &str = "thrust_envelope.csv";
pub const POWER_FILE: &str = "power.csv";
pub const STEERING_FILE: &str = "steering.csv";
pub const PERTURBATION_FILE: &str = "perturbations.csv";

/// In-plane angle ε from û_t toward û_r and out-of-plane angle δ, both in degrees.
pub fn steering_angles(alpha: &[f64; 3]) -> (f64, f64) {
    let delta = alpha[2].clamp(-1.0, 1.0).asin().to_degrees();
    let in_plane = alpha[0].hypot(alpha[1]);
    if in_plane < 1e-12 {
        return (0.0, delta);
    }
    let mut eps = alpha[0].atan2(alpha[1]).to_degrees();
    if eps <= -180.0 {
        eps += 360.0;
    }
    (eps, delta)
}

/// Remove 360° jumps from an angle series.
pub fn unwrap_degrees(raw: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    let mut offset = 0.0_f64;
    for (i, &a) in raw.iter().enumerate() {
        if i > 0 {
            let d = a + offset - out[i - 1];
            if d > 180.0 {
                offset -= 360.0 * ((d + 180.0) / 360.0).floor();
            } else if d < -180.0 {
                offset += 360.0 * ((-d + 180.0) / 360.0).floor();
            }
        }
        out.push(a + offset);
    }
    out
}

/// Engine operating mode from Isp with a relative band at either bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IspMode {
    Min,
    Intermediate,
    Max,
}

pub fn classify_isp(isp: f64, isp_min: f64, isp_max: f64, band: f64) -> IspMode {
    if isp <= isp_min * (1.0 + band) {
        IspMode::Min
    } else if isp >= isp_max * (1.0 - band) {
        IspMode::Max
    } else {
        IspMode::Intermediate
    }
}

/// Number of mode changes along an Isp series.
pub fn count_mode_transitions(isp: &[f64], isp_min: f64, isp_max: f64, band: f64) -> usize {
    isp.windows(2)
        .filter(|w| classify_isp(w[0], isp_min, isp_max, band) != classify_isp(w[1], isp_min, isp_max, band))
        .count()
}

/// Dimensional quantities derived from one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub t_days: f64,
    pub mee: [f64; 6],
    pub m_kg: f64,
    pub r_km: [f64; 3],
    pub v_kms: [f64; 3],
    pub thrust_n: f64,
    pub isp_s: f64,
    pub power_w: f64,
    pub switching: f64,
    pub eps_raw_deg: f64,
    pub delta_deg: f64,
    pub p_sa_w: f64,
    pub p_ava_w: f64,
    /// Thruster power ceiling, W.
    pub p_max_w: f64,
    pub r_au: f64,
    pub alpha: [f64; 3],
    pub c_op_kms: f64,
}

pub fn sample_record(s: &TrajectorySample, model: &ForceModel, g0: f64) -> Result<SampleRecord> {
    let u = &model.units;
    let x = s.z.x;
    let cart = mee_to_cart(&x, model.mu());
    let ctl = &s.control;
    let c = ctl.input.exhaust_velocity;
    let r_au = model.radius(&x.to_array());
    let t_sec = s.t * u.time_unit;
    let (eps, delta) = steering_angles(&ctl.input.alpha_hat);
    Ok(SampleRecord {
        t_days: u.tu_to_days(s.t),
        mee: x.to_array(),
        m_kg: s.z.m * u.mass_unit,
        r_km: cart.r.map(|v| u.lu_to_km(v)),
        v_kms: cart.v.map(|v| u.vu_to_kms(v)),
        thrust_n: model.engine.thrust_generic(ctl.input.power, c) * u.force_unit(),
        isp_s: c * u.velocity_unit() / g0,
        power_w: ctl.input.power * u.power_unit(),
        switching: ctl.switching,
        eps_raw_deg: eps,
        delta_deg: delta,
        p_sa_w: model.power.solar_array_power(t_sec, r_au)?,
        p_ava_w: ctl.p_ava_w,
        p_max_w: ctl.p_max * u.power_unit(),
        r_au,
        alpha: ctl.input.alpha_hat,
        c_op_kms: ctl.c_op * u.velocity_unit() / 1e3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NrevRecord {
    pub nrev: u32,
    pub converged: bool,
    pub final_mass_kg: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub case: Option<u8>,
    pub converged: bool,
    pub final_mass_kg: f64,
    pub nrev: u32,
    pub eta0: [f64; 7],
    pub residual_norm: f64,
    pub iterations: usize,
    pub rho_b: f64,
    pub rho_c: f64,
    pub isp_switches: usize,
    pub min_switching: f64,
    pub transversality: f64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub stages: Vec<StageRecord>,
    pub nrev_results: Vec<NrevRecord>,
    pub error: Option<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CscError {
    CscError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.17e}"))).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Write the trajectory, summary and plot-data files into `dir`; returns the paths written.
pub fn emit_outputs(trajectory: &Trajectory, summary: &RunSummary, model: &ForceModel, g0: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let recs: Vec<SampleRecord> = trajectory.samples.iter().map(|s| sample_record(s, model, g0)).collect::<Result<_>>()?;
    let eps_raw: Vec<f64> = recs.iter().map(|r| r.eps_raw_deg).collect();
    let eps = unwrap_degrees(&eps_raw);
    let mut written = Vec::new();

    let path = dir.join(TRAJECTORY_FILE);
    write_rows(
        &path,
        &header(&TRAJECTORY_COLUMNS),
        recs.iter().zip(&eps).map(|(r, e)| {
            let mut row = vec![r.t_days];
            row.extend_from_slice(&r.mee);
            row.push(r.m_kg);
            row.extend_from_slice(&r.r_km);
            row.extend_from_slice(&r.v_kms);
            row.extend_from_slice(&[r.thrust_n, r.isp_s, r.power_w, r.switching, *e, r.delta_deg, r.p_sa_w, r.p_ava_w, r.eps_raw_deg]);
            row
        }),
    )?;
    written.push(path);

    let eng = &model.engine;
    let fu = model.units.force_unit();
    let pu = model.units.power_unit();
    let path = dir.join(THRUST_FILE);
    write_rows(
        &path,
        &header(&["t_days", "T_N", "T_min_N", "T_op_N", "T_max_N"]),
        recs.iter().map(|r| {
            let p = r.p_max_w / pu;
            let c_op = r.c_op_kms * 1e3 / model.units.velocity_unit();
            let t_op = if c_op > 0.0 { eng.thrust_generic(p, c_op) * fu } else { f64::NAN };
            vec![r.t_days, r.thrust_n, eng.thrust_generic(p, eng.c_max) * fu, t_op, eng.thrust_generic(p, eng.c_min) * fu]
        }),
    )?;
    written.push(path);

    let path = dir.join(POWER_FILE);
    write_rows(
        &path,
        &header(&["t_days", "r_au", "P_SA_W", "P_ava_W", "P_W", "S"]),
        recs.iter().map(|r| vec![r.t_days, r.r_au, r.p_sa_w, r.p_ava_w, r.power_w, r.switching]),
    )?;
    written.push(path);

    let path = dir.join(STEERING_FILE);
    write_rows(
        &path,
        &header(&["t_days", "eps_deg", "delta_deg", "eps_raw_deg", "alpha_r", "alpha_t", "alpha_h"]),
        recs.iter().zip(&eps).map(|(r, e)| vec![r.t_days, *e, r.delta_deg, r.eps_raw_deg, r.alpha[0], r.alpha[1], r.alpha[2]]),
    )?;
    written.push(path);

    let path = dir.join(PERTURBATION_FILE);
    let bodies = model.perturbations.as_ref().map(|p| p.bodies.clone()).unwrap_or_default();
    let mut cols = vec!["t_days".to_string()];
    cols.extend(bodies.iter().map(|b| format!("{}_m_s2", b.name())));
    let au = model.units.acceleration_unit();
    let mut rows = Vec::with_capacity(recs.len());
    for (s, r) in trajectory.samples.iter().zip(&recs) {
        let mut row = vec![r.t_days];
        if let Some(p) = &model.perturbations {
            let snap = p.ephemeris.snapshot(&p.bodies, s.t)?;
            let rs = mee_to_cart(&s.z.x, model.mu()).r;
            for b in &snap {
                let a = third_body_accel_inertial(&rs, std::slice::from_ref(b), p.form, p.floor)?;
                row.push((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt() * au);
            }
        }
        rows.push(row);
    }
    write_rows(&path, &cols, rows.into_iter())?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(summary).map_err(|e| io_err(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    written.push(path);
    Ok(written)
}
