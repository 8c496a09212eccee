use crate::canonical::MeeState;
use crate::control::{compute_controls, ControlPoint, OperationalGates, SmoothingParams};
use crate::costate::{costate_rates_cx, CxConfig, FullState};
use crate::dynamics::{state_rates, ForceModel, RatesInput};
use crate::error::{CscError, Result};
use crate::integrator::{integrate, Dopri5Options};
use crate::scalar::scale;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Fewest reporting samples a dense trajectory carries.
pub const MIN_OUTPUT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationTolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for PropagationTolerances {
    fn default() -> Self {
        Self { rel_tol: 1e-15, abs_tol: 1e-15 }
    }
}

impl PropagationTolerances {
    pub fn options(&self) -> Dopri5Options {
        Dopri5Options::with_tol(self.rel_tol, self.abs_tol)
    }
}

/// Fixed data of one shooting problem; the unknowns are the seven initial costates.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingProblem {
    pub model: ForceModel,
    pub gates: OperationalGates,
    pub rho: SmoothingParams,
    pub x0: MeeState,
    /// Initial mass in mass units.
    pub m0: f64,
    /// Target elements with `l` in [0, 2π).
    pub target: MeeState,
    pub nrev: u32,
    pub t0: f64,
    pub tf: f64,
    /// Residual weights for p, f, g, h, k, l, λ_m.
    pub weights: [f64; 7],
    pub tolerances: PropagationTolerances,
    pub cx: CxConfig,
}

impl ShootingProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.tf > self.t0) {
            return Err(CscError::Domain(format!("final time {} must exceed initial time {}", self.tf, self.t0)));
        }
        if !(self.m0 > 0.0) {
            return Err(CscError::Domain("initial mass must be positive".into()));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(CscError::Domain("residual weights must be positive".into()));
        }
        self.x0.validate()?;
        self.target.validate()?;
        self.rho.validate()?;
        self.gates.validate(self.t0, self.tf)?;
        self.tolerances.options().validate()
    }

    /// Unwrapped target longitude `l̃_f + 2πN_rev`.
    pub fn target_longitude(&self) -> f64 {
        self.target.l + TAU * self.nrev as f64
    }

    pub fn target_array(&self) -> [f64; 6] {
        let mut a = self.target.to_array();
        a[5] = self.target_longitude();
        a
    }

    pub fn with_rho(&self, rho: SmoothingParams) -> Self {
        Self { rho, ..self.clone() }
    }

    pub fn with_nrev(&self, nrev: u32) -> Self {
        Self { nrev, ..self.clone() }
    }

    pub fn initial_state(&self, eta0: &[f64; 7]) -> FullState {
        FullState {
            x: self.x0,
            m: self.m0,
            lambda: [eta0[0], eta0[1], eta0[2], eta0[3], eta0[4], eta0[5]],
            lambda_m: eta0[6],
        }
    }

    /// Stopping threshold on the weighted residual for an unweighted tolerance `tol`.
    pub fn scaled_tolerance(&self, tol: f64) -> f64 {
        tol * self.weights.iter().cloned().fold(0.0, f64::max)
    }
}

/// State-costate rates together with the controls they were built from.
pub fn full_rates_with_controls(z: &FullState, t: f64, problem: &ShootingProblem) -> Result<([f64; 14], ControlPoint)> {
    let model = &problem.model;
    let ctrl = compute_controls(z, t, model, &problem.gates, &problem.rho)?;
    let snap = model.snapshot(t)?;
    let x = z.x.to_array();
    let power = ctrl.input.power;
    let c = ctrl.input.exhaust_velocity;
    let thrust = model.engine.thrust_generic(power, c);
    let rates = state_rates(
        &RatesInput {
            x,
            m: z.m,
            control_accel: scale(&ctrl.input.alpha_hat, thrust / z.m),
            perturb_accel: model.perturbation_lvlh(&x, &snap)?,
            mdot: model.engine.mass_flow_generic(power, c),
        },
        model.mu(),
    )?;
    let co = costate_rates_cx(z, t, &ctrl, model, &snap, &problem.cx)?;
    let mut out = [0.0; 14];
    out[..7].copy_from_slice(&rates);
    out[7..].copy_from_slice(&co);
    Ok((out, ctrl))
}

pub fn full_rates(z: &FullState, t: f64, problem: &ShootingProblem) -> Result<[f64; 14]> {
    full_rates_with_controls(z, t, problem).map(|r| r.0)
}

/// One reporting point along a propagated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub z: FullState,
    pub control: ControlPoint,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub evaluations: usize,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&FullState> {
        self.samples.last().map(|s| &s.z)
    }
}

fn rhs<'a>(problem: &'a ShootingProblem) -> impl FnMut(f64, &[f64; 14]) -> Result<[f64; 14]> + 'a {
    move |t, y| full_rates(&FullState::from_array(y), t, problem)
}

/// Endpoint of the state-costate flow from `z0` at `t0` to `tf`.
pub fn propagate_endpoint(z0: &FullState, problem: &ShootingProblem) -> Result<(FullState, usize)> {
    let sol = integrate(rhs(problem), problem.t0, z0.to_array(), problem.tf, &problem.tolerances.options(), false)?;
    Ok((FullState::from_array(&sol.y), sol.evaluations))
}

/// Dense propagation sampled on every accepted step plus a uniform grid.
pub fn propagate(z0: &FullState, t0: f64, tf: f64, tol: &PropagationTolerances, problem: &ShootingProblem) -> Result<Trajectory> {
    tol.options().validate()?;
    let sol = integrate(rhs(problem), t0, z0.to_array(), tf, &tol.options(), true)?;
    let mut times = sol.step_times();
    let n = MIN_OUTPUT_SAMPLES;
    times.extend((0..n).map(|i| t0 + (tf - t0) * i as f64 / (n - 1) as f64));
    times.sort_by(|a, b| a.total_cmp(b));
    let eps = 1e-12 * (tf - t0);
    times.dedup_by(|a, b| (*a - *b).abs() <= eps);
    if let Some(last) = times.last_mut() {
        *last = tf;
    }
    times[0] = t0;
    let mut samples = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let y = if i + 1 == times.len() {
            sol.y
        } else if i == 0 {
            z0.to_array()
        } else {
            sol.sample(t).ok_or_else(|| CscError::Propagation { t, reason: "dense output unavailable".into() })?
        };
        let z = FullState::from_array(&y);
        let (_, control) = full_rates_with_controls(&z, t, problem)?;
        samples.push(TrajectorySample { t, z, control });
    }
    Ok(Trajectory { samples, iterations: 0, residual_norm: f64::NAN, evaluations: sol.evaluations, steps: sol.accepted })
}

/// Weighted residual and the propagated endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOutcome {
    pub residual: [f64; 7],
    pub z_f: FullState,
    pub evaluations: usize,
}

impl ShootingOutcome {
    pub fn norm_inf(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, r| a.max(r.abs()))
    }
}

/// `[x(t_f) − x_T, λ_m(t_f) + 1]`, componentwise weighted.
pub fn shooting_residual(eta0: &[f64; 7], problem: &ShootingProblem) -> Result<ShootingOutcome> {
    if eta0.iter().any(|v| !v.is_finite()) {
        return Err(CscError::Domain("non-finite costate guess".into()));
    }
    let (z_f, evaluations) = propagate_endpoint(&problem.initial_state(eta0), problem)?;
    let target = problem.target_array();
    let xf = z_f.x.to_array();
    let mut residual = [0.0; 7];
    for i in 0..6 {
        residual[i] = problem.weights[i] * (xf[i] - target[i]);
    }
    residual[6] = problem.weights[6] * (z_f.lambda_m + 1.0);
    Ok(ShootingOutcome { residual, z_f, evaluations })
}
