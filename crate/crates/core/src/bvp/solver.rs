use super::problem::{propagate, shooting_residual, ShootingOutcome, ShootingProblem, Trajectory};
use crate::error::{CscError, Result};
use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type Mat7 = SMatrix<f64, 7, 7>;
type Vec7 = SVector<f64, 7>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Convergence threshold on the ∞-norm of the residual.
    pub tol: f64,
    pub max_iterations: usize,
    /// Iteration budget per multistart sample.
    pub multistart_iterations: usize,
    pub fd_step: f64,
    pub multistart_samples: usize,
    pub seed: u64,
    /// Half-width of the uniform box random guesses are drawn from.
    pub guess_range: f64,
    pub initial_damping: f64,
    /// Abandon a direct multistart attempt whose residual is still above this
    /// after a quarter of its iteration budget.
    pub abandon_residual: f64,
    /// Fall back to a Newton homotopy when the direct attempt from a guess fails.
    pub continuation: bool,
    /// Largest homotopy increment in the Newton homotopy.
    pub continuation_step: f64,
    pub continuation_min_step: f64,
    /// Iteration budget of one homotopy increment.
    pub continuation_iterations: usize,
    /// Tolerance of the intermediate homotopy solves.
    pub continuation_tol: f64,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 60,
            multistart_iterations: 300,
            fd_step: 1e-7,
            multistart_samples: 100,
            seed: 1,
            guess_range: 1.0,
            initial_damping: 1e-3,
            abandon_residual: 1e-1,
            continuation: true,
            continuation_step: 0.25,
            continuation_min_step: 1e-3,
            continuation_iterations: 15,
            continuation_tol: 1e-7,
            parallel: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.fd_step > 0.0) || !(self.guess_range > 0.0) {
            return Err(CscError::Config("solver tol, fd_step and guess_range must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(CscError::Config("solver max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub eta0: [f64; 7],
    pub outcome: ShootingOutcome,
    pub iterations: usize,
    pub evaluations: usize,
    /// ∞-norm of the residual after each accepted iterate, starting from the guess.
    pub history: Vec<f64>,
    /// Index of the multistart sample that converged, if any.
    pub sample: Option<usize>,
}

impl SolveReport {
    pub fn residual_norm(&self) -> f64 {
        self.outcome.norm_inf()
    }
}

fn jacobian(eta: &[f64; 7], r0: &ShootingOutcome, problem: &ShootingProblem, cfg: &SolverConfig, offset: Option<&[f64; 7]>) -> Result<(Mat7, usize)> {
    let column = |j: usize| -> Result<([f64; 7], usize)> {
        let h = cfg.fd_step;
        let mut e = *eta;
        e[j] += h;
        let (out, sign) = match offset_residual(&e, problem, offset) {
            Ok(o) => (o, 1.0),
            Err(_) => {
                e[j] = eta[j] - h;
                (offset_residual(&e, problem, offset)?, -1.0)
            }
        };
        Ok((std::array::from_fn(|i| sign * (out.residual[i] - r0.residual[i]) / h), out.evaluations))
    };
    let cols: Vec<Result<([f64; 7], usize)>> = if cfg.parallel { par_map(7, column) } else { (0..7).map(column).collect() };
    let mut jac = Mat7::zeros();
    let mut evals = 0;
    for (j, c) in cols.into_iter().enumerate() {
        let (c, n) = c?;
        evals += n;
        for i in 0..7 {
            jac[(i, j)] = c[i];
        }
    }
    Ok((jac, evals))
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

fn l2(r: &[f64; 7]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt on the shooting map with a forward-difference Jacobian.
/// `abandon` gives an (iteration, residual) gate after which hopeless starts stop early.
pub fn levenberg_marquardt(
    guess: &[f64; 7],
    problem: &ShootingProblem,
    cfg: &SolverConfig,
    max_iterations: usize,
    abandon: Option<(usize, f64)>,
) -> Result<SolveReport> {
    lm_offset(guess, problem, cfg, max_iterations, abandon, None)
}

fn offset_residual(eta: &[f64; 7], problem: &ShootingProblem, offset: Option<&[f64; 7]>) -> Result<ShootingOutcome> {
    let mut out = shooting_residual(eta, problem)?;
    if let Some(o) = offset {
        for (r, v) in out.residual.iter_mut().zip(o) {
            *r -= v;
        }
    }
    Ok(out)
}

/// Levenberg–Marquardt on `F(η) − offset`.
pub fn lm_offset(
    guess: &[f64; 7],
    problem: &ShootingProblem,
    cfg: &SolverConfig,
    max_iterations: usize,
    abandon: Option<(usize, f64)>,
    offset: Option<&[f64; 7]>,
) -> Result<SolveReport> {
    let tol = problem.scaled_tolerance(cfg.tol);
    let mut eta = *guess;
    let mut cur = offset_residual(&eta, problem, offset)?;
    let mut evals = cur.evaluations;
    let mut history = vec![cur.norm_inf()];
    let mut mu = cfg.initial_damping;
    let mut iterations = 0;
    while cur.norm_inf() > tol {
        if iterations >= max_iterations {
            return Err(CscError::NoConvergence {
                best_residual: cur.norm_inf(),
                detail: format!("iteration limit {max_iterations} reached"),
            });
        }
        if let Some((k, level)) = abandon {
            if iterations >= k && cur.norm_inf() > level {
                return Err(CscError::NoConvergence { best_residual: cur.norm_inf(), detail: "abandoned".into() });
            }
        }
        iterations += 1;
        let (jac, n) = jacobian(&eta, &cur, problem, cfg, offset)?;
        evals += n;
        let r = Vec7::from_column_slice(&cur.residual);
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r;
        let scale_max = (0..7).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
        let mut accepted = false;
        for _ in 0..12 {
            let mut a = jtj;
            for i in 0..7 {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12 * scale_max);
            }
            let step = match a.lu().solve(&(-g)) {
                Some(s) if s.iter().all(|v| v.is_finite()) => s,
                _ => {
                    mu *= 10.0;
                    continue;
                }
            };
            let trial: [f64; 7] = std::array::from_fn(|i| eta[i] + step[i]);
            match offset_residual(&trial, problem, offset) {
                Ok(out) if l2(&out.residual) < l2(&cur.residual) => {
                    evals += out.evaluations;
                    eta = trial;
                    cur = out;
                    mu = (mu * 0.1).max(1e-12);
                    accepted = true;
                    break;
                }
                Ok(out) => {
                    evals += out.evaluations;
                    mu *= 10.0;
                }
                Err(_) => mu *= 10.0,
            }
        }
        history.push(cur.norm_inf());
        if !accepted {
            return Err(CscError::NoConvergence { best_residual: cur.norm_inf(), detail: "damping failed to reduce residual".into() });
        }
        log::debug!("iteration {iterations}: |r| = {:.3e}, damping {mu:.1e}", cur.norm_inf());
    }
    Ok(SolveReport { eta0: eta, outcome: cur, iterations, evaluations: evals, history, sample: None })
}

/// Deterministic random initial costates, uniform in `[−range, range]⁷`.
pub fn multistart_guesses(seed: u64, count: usize, range: f64) -> Vec<[f64; 7]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| std::array::from_fn(|_| rng.random_range(-range..=range))).collect()
}

/// Newton homotopy from `guess`: solve `F(η) = (1 − s) F(η_guess)` while `s` goes from 0 to 1.
pub fn newton_homotopy(guess: &[f64; 7], problem: &ShootingProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let f0 = shooting_residual(guess, problem)?;
    let inner = SolverConfig { tol: cfg.continuation_tol.max(cfg.tol), ..*cfg };
    let mut eta = *guess;
    let mut s = 0.0;
    let mut ds = cfg.continuation_step;
    let mut iterations = 0;
    let mut evaluations = f0.evaluations;
    let mut history = vec![f0.norm_inf()];
    let mut fails = 0;
    while s < 1.0 {
        if iterations >= cfg.multistart_iterations || ds < cfg.continuation_min_step {
            return Err(CscError::NoConvergence {
                best_residual: f0.norm_inf() * (1.0 - s),
                detail: format!("continuation stopped at s = {s:.4}"),
            });
        }
        let next = (s + ds).min(1.0);
        let offset = f0.residual.map(|v| (1.0 - next) * v);
        let budget = cfg.continuation_iterations.min(cfg.multistart_iterations - iterations).max(1);
        match lm_offset(&eta, problem, &inner, budget, None, Some(&offset)) {
            Ok(r) => {
                iterations += r.iterations;
                evaluations += r.evaluations;
                eta = r.eta0;
                s = next;
                history.push(r.outcome.norm_inf());
                ds = (ds * 2.0).min(cfg.continuation_step);
                fails = 0;
            }
            Err(e) => {
                iterations += budget.min(cfg.continuation_iterations);
                fails += 1;
                log::trace!("continuation step to s = {next:.4} failed: {e}");
                if fails >= 2 && s == 0.0 && ds < 0.05 {
                    return Err(CscError::NoConvergence { best_residual: f0.norm_inf(), detail: "continuation could not leave the guess".into() });
                }
                ds *= 0.5;
            }
        }
    }
    let mut rep = levenberg_marquardt(&eta, problem, cfg, cfg.max_iterations, None)?;
    rep.iterations += iterations;
    rep.evaluations += evaluations;
    history.extend(rep.history.iter().skip(1));
    rep.history = history;
    Ok(rep)
}

/// Try seeded random guesses, most promising (smallest initial residual) first.
/// Each is polished by a direct Levenberg–Marquardt attempt and, failing that,
/// by a Newton homotopy. Ties and parallel chunks are resolved by rank order.
pub fn multistart(problem: &ShootingProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let guesses = multistart_guesses(cfg.seed, cfg.multistart_samples, cfg.guess_range);
    let screen = |i: usize| shooting_residual(&guesses[i], problem).map(|o| o.norm_inf());
    let norms: Vec<Result<f64>> = if cfg.parallel { par_map(guesses.len(), screen) } else { (0..guesses.len()).map(screen).collect() };
    let mut order: Vec<(usize, f64)> = norms
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.ok().filter(|v| v.is_finite()).map(|v| (i, v)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    log::info!("multistart: {} of {} guesses propagate", order.len(), guesses.len());
    let chunk = if cfg.parallel { thread_count() } else { 1 };
    let inner = SolverConfig { parallel: cfg.parallel && chunk == 1, ..*cfg };
    let abandon = Some((cfg.multistart_iterations / 4, cfg.abandon_residual));
    let mut best = f64::INFINITY;
    for block in order.chunks(chunk) {
        let attempt = |k: usize| {
            let g = &guesses[block[k].0];
            match levenberg_marquardt(g, problem, &inner, cfg.multistart_iterations / 2, abandon) {
                Ok(r) => Ok(r),
                Err(_) if cfg.continuation => newton_homotopy(g, problem, &inner),
                Err(e) => Err(e),
            }
        };
        let results: Vec<Result<SolveReport>> = if chunk > 1 { par_map(block.len(), attempt) } else { (0..block.len()).map(attempt).collect() };
        for (k, r) in results.into_iter().enumerate() {
            let index = block[k].0;
            match r {
                Ok(mut rep) => {
                    rep.sample = Some(index);
                    log::info!("multistart sample {index} converged in {} iterations", rep.iterations);
                    return Ok(rep);
                }
                Err(CscError::NoConvergence { best_residual, detail }) => {
                    log::debug!("multistart sample {index} rejected ({detail}, |r| = {best_residual:.3e})");
                    best = best.min(best_residual);
                }
                Err(e) => log::debug!("multistart sample {index} rejected: {e}"),
            }
        }
    }
    Err(CscError::NoConvergence {
        best_residual: best,
        detail: format!("{} multistart samples exhausted", guesses.len()),
    })
}

#[cfg(feature = "parallel")]
fn thread_count() -> usize {
    rayon::current_num_threads().max(1)
}

#[cfg(not(feature = "parallel"))]
fn thread_count() -> usize {
    1
}

/// Converge from `guess`, or by multistart when none is given, and propagate densely.
pub fn solve_tpbvp(guess: Option<&[f64; 7]>, problem: &ShootingProblem, cfg: &SolverConfig) -> Result<(SolveReport, Trajectory)> {
    problem.validate()?;
    cfg.validate()?;
    let report = match guess {
        Some(g) => levenberg_marquardt(g, problem, cfg, cfg.max_iterations, None)?,
        None => multistart(problem, cfg)?,
    };
    let mut traj = propagate(&problem.initial_state(&report.eta0), problem.t0, problem.tf, &problem.tolerances, problem)?;
    traj.iterations = report.iterations;
    traj.residual_norm = report.residual_norm();
    traj.evaluations += report.evaluations;
    Ok((report, traj))
}
