//! Optimal controls and their composite smooth approximations.
//!
//! Every discrete branch of the Pontryagin-optimal law (bang-off power,
//! clamped exhaust velocity, time windows) is replaced by a blend of
//! hyperbolic-tangent activation functions whose sharpness is set by
//! [`SmoothingParams`].

use crate::costate::FullState;
use crate::dynamics::{bt_lambda, control_influence, ForceModel};
use crate::engine::EngineModel;
use crate::error::{CscError, Result};
use crate::scalar::{norm, Scalar, Vec3};
use serde::{Deserialize, Serialize};

/// Below this ‖Bᵀλ‖ the primer direction is considered undefined.
pub const PRIMER_FLOOR: f64 = 1e-14;

/// Thrust direction (unit, LVLH), power and exhaust velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub alpha_hat: Vec3<f64>,
    pub power: f64,
    pub exhaust_velocity: f64,
}

/// A [`ControlInput`] together with the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub input: ControlInput,
    /// Fraction of the power ceiling delivered, including every gate.
    pub throttle: f64,
    /// Power ceiling at the current position and time.
    pub p_max: f64,
    pub switching: f64,
    pub c_op: f64,
    /// Available power before flooring, in watts.
    pub p_ava_w: f64,
    pub no_power_gate: f64,
    pub zero_thrust_gate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub rho_b: f64,
    pub rho_c: f64,
}

impl SmoothingParams {
    pub fn new(rho_b: f64, rho_c: f64) -> Self {
        Self { rho_b, rho_c }
    }

    pub fn uniform(rho: f64) -> Self {
        Self { rho_b: rho, rho_c: rho }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_b > 0.0 && self.rho_c > 0.0) {
            return Err(CscError::Config("smoothing parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Thrust-direction override active over `[t_lower, t_upper]` (TU).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionWindow {
    pub t_lower: f64,
    pub t_upper: f64,
    /// Desired LVLH unit direction.
    pub alpha_desired: Vec3<f64>,
}

/// Operational constraints applied on top of the optimal law. Times in TU.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperationalGates {
    pub zero_thrust_windows: Vec<(f64, f64)>,
    pub forced_direction_windows: Vec<DirectionWindow>,
    /// Minimum available power (W) for the thruster to operate.
    pub p_ava_min: f64,
}

impl OperationalGates {
    pub fn validate(&self, t0: f64, tf: f64) -> Result<()> {
        let ok = |l: f64, u: f64| t0 < l && l < u && u < tf;
        for &(l, u) in &self.zero_thrust_windows {
            if !ok(l, u) {
                return Err(CscError::Config(format!("zero-thrust window ({l}, {u}) must satisfy t0 < t_l < t_u < t_f")));
            }
        }
        for w in &self.forced_direction_windows {
            if !ok(w.t_lower, w.t_upper) {
                return Err(CscError::Config(format!(
                    "direction window ({}, {}) must satisfy t0 < t_l < t_u < t_f",
                    w.t_lower, w.t_upper
                )));
            }
            if (norm(&w.alpha_desired) - 1.0).abs() > 1e-9 {
                return Err(CscError::Config("desired thrust direction must be a unit vector".into()));
            }
        }
        Ok(())
    }
}

fn bt_lambda_norm(x: &[f64; 6], lambda: &[f64; 6], mu: f64) -> Result<(Vec3<f64>, f64)> {
    let b = control_influence(x, mu)?;
    let btl = bt_lambda(&b, lambda);
    Ok((btl, norm(&btl)))
}

/// Unit primer direction −Bᵀλ/‖Bᵀλ‖.
pub fn primer_direction(x: &[f64; 6], lambda: &[f64; 6], mu: f64) -> Result<Vec3<f64>> {
    let (btl, n) = bt_lambda_norm(x, lambda, mu)?;
    if n < PRIMER_FLOOR {
        return Err(CscError::DegenerateDirection(n));
    }
    Ok([-btl[0] / n, -btl[1] / n, -btl[2] / n])
}

/// S = ‖Bᵀλ‖/m + λ_m/c.
pub fn switching_function(bt_lambda_norm: f64, m: f64, lambda_m: f64, c: f64) -> f64 {
    bt_lambda_norm / m + lambda_m / c
}

/// Stationary exhaust velocity −2mλ_m/‖Bᵀλ‖.
pub fn c_op_unconstrained(m: f64, lambda_m: f64, bt_lambda_norm: f64) -> Result<f64> {
    if bt_lambda_norm < PRIMER_FLOOR {
        return Err(CscError::DegenerateDirection(bt_lambda_norm));
    }
    Ok(-2.0 * m * lambda_m / bt_lambda_norm)
}

pub fn clamp_exhaust_velocity(c_op: f64, engine: &EngineModel) -> f64 {
    engine.c_min.max(c_op.min(engine.c_max))
}

/// ½[1 − tanh(g/ρ)]: near 1 when the constraint g ≤ 0 holds, near 0 when violated.
#[inline]
pub fn smooth_activation<S: Scalar>(g: S, rho: f64) -> S {
    (S::from_real(1.0) - (g / rho).tanh()) * 0.5
}

/// The three activation weights (ζ_cmin, ζ_cop, ζ_cmax).
pub fn exhaust_velocity_activations(c_op: f64, c_min: f64, c_max: f64, rho_c: f64) -> [f64; 3] {
    let z_min = smooth_activation(c_op - c_min, rho_c);
    let z_op = smooth_activation(c_min - c_op, rho_c) * smooth_activation(c_op - c_max, rho_c);
    let z_max = smooth_activation(c_max - c_op, rho_c);
    [z_min, z_op, z_max]
}

/// Composite smooth exhaust velocity ζ_min·c_min + ζ_op·c_op + ζ_max·c_max.
pub fn composite_exhaust_velocity(c_op: f64, c_min: f64, c_max: f64, rho_c: f64) -> f64 {
    let [a, b, c] = exhaust_velocity_activations(c_op, c_min, c_max, rho_c);
    a * c_min + b * c_op + c * c_max
}

/// Smoothed bang-off fraction ½[1 + tanh(S/ρ_b)].
#[inline]
pub fn smooth_throttle(s: f64, rho_b: f64) -> f64 {
    0.5 * (1.0 + Scalar::tanh(s / rho_b))
}

#[inline]
pub fn no_power_gate(p_ava: f64, p_ava_min: f64, rho_b: f64) -> f64 {
    0.5 * (1.0 + Scalar::tanh((p_ava - p_ava_min) / rho_b))
}

/// Near 1 inside `window`, near 0 outside.
pub fn zero_thrust_gate(t: f64, window: (f64, f64), rho_c: f64) -> f64 {
    let (tl, tu) = window;
    let zl = 0.5 * (1.0 + Scalar::tanh((t - tl) / rho_c));
    let zu = 1.0 - 0.5 * (1.0 + Scalar::tanh((t - tu) / rho_c));
    zl * zu
}

/// Blend of the primer direction with a desired direction, renormalized.
pub fn forced_direction(p_unit: &Vec3<f64>, alpha_desired: &Vec3<f64>, zeta_time: f64) -> Result<Vec3<f64>> {
    let v: Vec3<f64> = std::array::from_fn(|i| (1.0 - zeta_time) * p_unit[i] + zeta_time * alpha_desired[i]);
    let n = norm(&v);
    if n < 1e-10 {
        return Err(CscError::DegenerateBlend(n));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// One building block of a composite control: a value and the constraints `g ≤ 0` that select it.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBlock {
    pub value: f64,
    pub constraints: Vec<f64>,
}

/// Σ_i [Π_j ζ(g_ij)] u_i.
pub fn composite_control_general(blocks: &[ControlBlock], rho_c: f64) -> f64 {
    blocks
        .iter()
        .map(|b| b.constraints.iter().map(|&g| smooth_activation(g, rho_c)).product::<f64>() * b.value)
        .sum()
}

/// Smoothed optimal controls at a real state-costate point.
pub fn compute_controls(
    z: &FullState,
    t: f64,
    model: &ForceModel,
    gates: &OperationalGates,
    rho: &SmoothingParams,
) -> Result<ControlPoint> {
    let x = z.x.to_array();
    let mu = model.mu();
    let (btl, n) = bt_lambda_norm(&x, &z.lambda, mu)?;
    if n < PRIMER_FLOOR {
        return Err(CscError::DegenerateDirection(n));
    }
    let mut alpha: Vec3<f64> = [-btl[0] / n, -btl[1] / n, -btl[2] / n];
    for w in &gates.forced_direction_windows {
        let zt = zero_thrust_gate(t, (w.t_lower, w.t_upper), rho.rho_c);
        if zt > 0.0 {
            alpha = forced_direction(&alpha, &w.alpha_desired, zt)?;
        }
    }
    let eng = &model.engine;
    let c_op = c_op_unconstrained(z.m, z.lambda_m, n)?;
    let c = composite_exhaust_velocity(c_op, eng.c_min, eng.c_max, rho.rho_c);
    let s = switching_function(n, z.m, z.lambda_m, c);
    let r = model.radius(&x);
    let p_ava_w = model.available_power_w(t, r)?;
    let p_max = model.p_max(t, r)?;
    let np = no_power_gate(p_ava_w, gates.p_ava_min, rho.rho_b);
    let zt: f64 = gates
        .zero_thrust_windows
        .iter()
        .map(|&w| zero_thrust_gate(t, w, rho.rho_c))
        .fold(0.0, f64::max);
    let throttle = (1.0 - zt) * np * smooth_throttle(s, rho.rho_b);
    Ok(ControlPoint {
        input: ControlInput { alpha_hat: alpha, power: throttle * p_max, exhaust_velocity: c },
        throttle,
        p_max,
        switching: s,
        c_op,
        p_ava_w,
        no_power_gate: np,
        zero_thrust_gate: zt,
    })
}
