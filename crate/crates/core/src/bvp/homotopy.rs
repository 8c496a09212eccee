use super::problem::{propagate, ShootingProblem, Trajectory};
use super::solver::{levenberg_marquardt, SolveReport, SolverConfig};
use crate::control::SmoothingParams;
use crate::error::{CscError, Result};
use serde::{Deserialize, Serialize};

/// Geometric reduction of the smoothing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomotopySchedule {
    pub rho_start: f64,
    pub rho_end: f64,
    pub factor: f64,
    pub max_steps: usize,
    /// Ratio ρ_c / ρ_b held along the sweep.
    pub rho_c_ratio: f64,
}

impl Default for HomotopySchedule {
    fn default() -> Self {
        Self { rho_start: 1.0, rho_end: 1e-5, factor: 0.1, max_steps: 50, rho_c_ratio: 1.0 }
    }
}

impl HomotopySchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_end > 0.0 && self.rho_end <= self.rho_start) {
            return Err(CscError::Config(format!("homotopy needs 0 < rho_end <= rho_start (got {}, {})", self.rho_end, self.rho_start)));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(CscError::Config(format!("homotopy factor must lie in (0, 1) (got {})", self.factor)));
        }
        if !(self.rho_c_ratio > 0.0) {
            return Err(CscError::Config("homotopy rho_c_ratio must be positive".into()));
        }
        if self.stages().len() > self.max_steps {
            return Err(CscError::Config(format!("homotopy needs more than max_steps = {} stages", self.max_steps)));
        }
        Ok(())
    }

    /// ρ_b values visited, from `rho_start` down to exactly `rho_end`.
    pub fn stages(&self) -> Vec<f64> {
        let mut out = vec![self.rho_start];
        let mut rho = self.rho_start;
        while rho > self.rho_end * (1.0 + 1e-9) && out.len() <= self.max_steps {
            rho *= self.factor;
            if rho <= self.rho_end * (1.0 + 1e-9) {
                rho = self.rho_end;
            }
            out.push(rho);
        }
        out
    }

    pub fn params(&self, rho_b: f64) -> SmoothingParams {
        SmoothingParams::new(rho_b, rho_b * self.rho_c_ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub rho_b: f64,
    pub rho_c: f64,
    pub final_mass_kg: f64,
    pub iterations: usize,
    pub residual_norm: f64,
    /// True when this stage was an inserted midpoint after a failed step.
    pub bisection: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyResult {
    pub report: SolveReport,
    pub trajectory: Trajectory,
    pub stages: Vec<StageRecord>,
    pub problem: ShootingProblem,
}

impl HomotopyResult {
    pub fn eta0(&self) -> [f64; 7] {
        self.report.eta0
    }

    pub fn final_mass_kg(&self) -> f64 {
        self.stages.last().map(|s| s.final_mass_kg).unwrap_or(f64::NAN)
    }
}

fn record(problem: &ShootingProblem, rep: &SolveReport, bisection: bool) -> StageRecord {
    StageRecord {
        rho_b: problem.rho.rho_b,
        rho_c: problem.rho.rho_c,
        final_mass_kg: rep.outcome.z_f.m * problem.model.units.mass_unit,
        iterations: rep.iterations,
        residual_norm: rep.residual_norm(),
        bisection,
    }
}

/// Sweep ρ down the schedule, warm-starting each stage from the previous costates.
/// A failed step is bisected once (geometric midpoint) before aborting.
pub fn homotopy_sweep(
    problem: &ShootingProblem,
    schedule: &HomotopySchedule,
    cfg: &SolverConfig,
    guess: Option<&[f64; 7]>,
) -> Result<HomotopyResult> {
    schedule.validate()?;
    let rhos = schedule.stages();
    let first = problem.with_rho(schedule.params(rhos[0]));
    first.validate()?;
    cfg.validate()?;
    let mut rep = match guess {
        Some(g) => match levenberg_marquardt(g, &first, cfg, cfg.max_iterations, None) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("warm start failed at rho = {:e} ({e}); falling back to multistart", rhos[0]);
                super::solver::multistart(&first, cfg)?
            }
        },
        None => super::solver::multistart(&first, cfg)?,
    };
    let mut stages = vec![record(&first, &rep, false)];
    log::info!("rho = {:e}: m_f = {:.6} kg ({} iterations)", rhos[0], stages[0].final_mass_kg, rep.iterations);
    let mut current = first;
    for &rho in &rhos[1..] {
        let next = problem.with_rho(schedule.params(rho));
        match levenberg_marquardt(&rep.eta0, &next, cfg, cfg.max_iterations, None) {
            Ok(r) => rep = r,
            Err(e) => {
                let mid_rho = (current.rho.rho_b * rho).sqrt();
                log::warn!("stage rho = {rho:e} failed ({e}); bisecting at {mid_rho:e}");
                let mid = problem.with_rho(schedule.params(mid_rho));
                let abort = |detail: String| CscError::HomotopyAbort {
                    last_rho: current.rho.rho_b,
                    eta0: Some(rep.eta0),
                    detail,
                };
                let r_mid = levenberg_marquardt(&rep.eta0, &mid, cfg, cfg.max_iterations, None).map_err(|e| abort(e.to_string()))?;
                stages.push(record(&mid, &r_mid, true));
                rep = levenberg_marquardt(&r_mid.eta0, &next, cfg, cfg.max_iterations, None).map_err(|e| CscError::HomotopyAbort {
                    last_rho: mid_rho,
                    eta0: Some(r_mid.eta0),
                    detail: e.to_string(),
                })?;
            }
        }
        let rec = record(&next, &rep, false);
        log::info!("rho = {rho:e}: m_f = {:.6} kg ({} iterations)", rec.final_mass_kg, rep.iterations);
        stages.push(rec);
        current = next;
    }
    let mut trajectory = propagate(&current.initial_state(&rep.eta0), current.t0, current.tf, &current.tolerances, &current)?;
    trajectory.iterations = rep.iterations;
    trajectory.residual_norm = rep.residual_norm();
    Ok(HomotopyResult { report: rep, trajectory, stages, problem: current })
}

/// Result for one revolution count.
#[derive(Debug, Clone)]
pub struct NrevOutcome {
    pub nrev: u32,
    pub result: Result<HomotopyResult>,
}

#[derive(Debug, Clone)]
pub struct NrevSweep {
    pub best: u32,
    pub outcomes: Vec<NrevOutcome>,
}

impl NrevSweep {
    pub fn best_result(&self) -> &HomotopyResult {
        self.outcomes
            .iter()
            .find(|o| o.nrev == self.best)
            .and_then(|o| o.result.as_ref().ok())
            .expect("best revolution count has a converged result")
    }
}

/// Full pipeline per revolution count; the best is the one with the largest final mass.
/// `guess` supplies optional first-stage costates per revolution count.
pub fn nrev_sweep<G>(
    problem: &ShootingProblem,
    nrevs: &[u32],
    schedule: &HomotopySchedule,
    cfg: &SolverConfig,
    guess: G,
) -> Result<NrevSweep>
where
    G: Fn(u32) -> Option<[f64; 7]> + Sync,
{
    if nrevs.is_empty() {
        return Err(CscError::Config("revolution range is empty".into()));
    }
    let run = |i: usize| {
        let n = nrevs[i];
        let g = guess(n);
        NrevOutcome { nrev: n, result: homotopy_sweep(&problem.with_nrev(n), schedule, cfg, g.as_ref()) }
    };
    let outcomes: Vec<NrevOutcome> = if cfg.parallel { super::solver::par_map(nrevs.len(), run) } else { (0..nrevs.len()).map(run).collect() };
    let mut best: Option<(u32, f64)> = None;
    for o in &outcomes {
        match &o.result {
            Ok(r) => {
                let mf = r.final_mass_kg();
                log::info!("N_rev = {}: m_f = {mf:.6} kg", o.nrev);
                if best.is_none_or(|(_, b)| mf > b) {
                    best = Some((o.nrev, mf));
                }
            }
            Err(e) => log::warn!("N_rev = {} did not converge: {e}", o.nrev),
        }
    }
    match best {
        Some((n, _)) => Ok(NrevSweep { best: n, outcomes }),
        None => Err(CscError::NoConvergence {
            best_residual: f64::NAN,
            detail: format!("no revolution count in {nrevs:?} converged"),
        }),
    }
}
