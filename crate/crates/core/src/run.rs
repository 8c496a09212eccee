//! Scenario orchestration: revolution sweep, smoothing homotopy, summary.

use crate::bvp::{homotopy_sweep, nrev_sweep, propagate, HomotopyResult, Trajectory};
use crate::error::{CscError, Result};
use crate::output::{count_mode_transitions, emit_outputs, NrevRecord, RunSummary};
use crate::scenario::ScenarioConfig;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Relative band used to classify Isp samples as at a bound.
pub const ISP_MODE_BAND: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    /// Converged trajectory, or the last converged stage when the sweep aborted.
    pub trajectory: Option<Trajectory>,
    pub result: Option<HomotopyResult>,
    pub error: Option<CscError>,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.summary.converged
    }
}

fn summarize(cfg: &ScenarioConfig, res: &HomotopyResult) -> RunSummary {
    let isp: Vec<f64> = res
        .trajectory
        .samples
        .iter()
        .map(|s| s.control.input.exhaust_velocity * res.problem.model.units.velocity_unit() / cfg.constants.g0_m_s2)
        .collect();
    let zf = res.trajectory.final_state().copied().unwrap_or(res.report.outcome.z_f);
    RunSummary {
        name: cfg.name.clone(),
        case: cfg.case,
        converged: true,
        final_mass_kg: res.final_mass_kg(),
        nrev: res.problem.nrev,
        eta0: res.eta0(),
        residual_norm: res.report.residual_norm(),
        iterations: res.report.iterations,
        rho_b: res.problem.rho.rho_b,
        rho_c: res.problem.rho.rho_c,
        isp_switches: count_mode_transitions(&isp, cfg.engine.isp_min_s, cfg.engine.isp_max_s, ISP_MODE_BAND),
        min_switching: res.trajectory.samples.iter().map(|s| s.control.switching).fold(f64::INFINITY, f64::min),
        transversality: (zf.lambda_m + 1.0).abs(),
        wall_time_s: 0.0,
        seed: cfg.solver.seed,
        stages: res.stages.clone(),
        nrev_results: Vec::new(),
        error: None,
    }
}

fn failed_summary(cfg: &ScenarioConfig, e: &CscError) -> RunSummary {
    RunSummary {
        name: cfg.name.clone(),
        case: cfg.case,
        converged: false,
        final_mass_kg: f64::NAN,
        nrev: cfg.run.nrev,
        eta0: [f64::NAN; 7],
        residual_norm: match e {
            CscError::NoConvergence { best_residual, .. } => *best_residual,
            _ => f64::NAN,
        },
        iterations: 0,
        rho_b: f64::NAN,
        rho_c: f64::NAN,
        isp_switches: 0,
        min_switching: f64::NAN,
        transversality: f64::NAN,
        wall_time_s: 0.0,
        seed: cfg.solver.seed,
        stages: Vec::new(),
        nrev_results: Vec::new(),
        error: Some(e.to_string()),
    }
}

/// Solve the scenario. Model and configuration errors are returned as `Err`;
/// convergence failures are reported inside the output.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = cfg.problem()?;
    let nrevs = cfg.nrevs();
    let (outcome, nrev_results) = if nrevs.len() > 1 {
        match nrev_sweep(&problem, &nrevs, &cfg.homotopy, &cfg.solver, |n| cfg.guess_for(n)) {
            Ok(sweep) => {
                let recs = sweep
                    .outcomes
                    .iter()
                    .map(|o| NrevRecord {
                        nrev: o.nrev,
                        converged: o.result.is_ok(),
                        final_mass_kg: o.result.as_ref().ok().map(|r| r.final_mass_kg()),
                        error: o.result.as_ref().err().map(|e| e.to_string()),
                    })
                    .collect();
                (Ok(sweep.best_result().clone()), recs)
            }
            Err(e) => (Err(e), Vec::new()),
        }
    } else {
        let p = problem.with_nrev(nrevs[0]);
        (homotopy_sweep(&p, &cfg.homotopy, &cfg.solver, cfg.guess_for(nrevs[0]).as_ref()), Vec::new())
    };
    let mut out = match outcome {
        Ok(res) => {
            let summary = summarize(cfg, &res);
            RunOutput { summary, trajectory: Some(res.trajectory.clone()), result: Some(res), error: None }
        }
        Err(e) => {
            let partial = match &e {
                CscError::HomotopyAbort { last_rho, eta0: Some(eta), .. } => {
                    let p = problem.with_nrev(nrevs[0]).with_rho(cfg.homotopy.params(*last_rho));
                    propagate(&p.initial_state(eta), p.t0, p.tf, &p.tolerances, &p).ok()
                }
                _ => None,
            };
            RunOutput { summary: failed_summary(cfg, &e), trajectory: partial, result: None, error: Some(e) }
        }
    };
    out.summary.nrev_results = nrev_results;
    out.summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Write all result files for a finished run into `dir`.
pub fn write_run(cfg: &ScenarioConfig, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let model = cfg.force_model()?;
    let empty = Trajectory::default();
    let traj = out.trajectory.as_ref().unwrap_or(&empty);
    emit_outputs(traj, &out.summary, &model, cfg.constants.g0_m_s2, dir)
}
