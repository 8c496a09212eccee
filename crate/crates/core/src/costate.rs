//! Costate dynamics by complex-step differentiation of the Hamiltonian.
//!
//! Controls are computed once from the real state and held fixed while each of
//! the seven states (six elements and mass) is perturbed along the imaginary
//! axis; `λ̇_i = −Im H(x + iγe_i) / γ`.

use crate::canonical::MeeState;
use crate::control::ControlPoint;
use crate::dynamics::{bt_lambda, control_influence, hamiltonian, ForceModel};
use crate::ephemeris::BodySnapshot;
use crate::error::Result;
use crate::scalar::{norm, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// State, mass and their costates: the 14-dimensional shooting state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub x: MeeState,
    pub m: f64,
    pub lambda: [f64; 6],
    pub lambda_m: f64,
}

impl FullState {
    pub fn to_array(&self) -> [f64; 14] {
        let mut a = [0.0; 14];
        a[..6].copy_from_slice(&self.x.to_array());
        a[6] = self.m;
        a[7..13].copy_from_slice(&self.lambda);
        a[13] = self.lambda_m;
        a
    }

    pub fn from_array(a: &[f64; 14]) -> Self {
        Self {
            x: MeeState::from_array(&[a[0], a[1], a[2], a[3], a[4], a[5]]),
            m: a[6],
            lambda: [a[7], a[8], a[9], a[10], a[11], a[12]],
            lambda_m: a[13],
        }
    }

    /// Initial costates `[λ; λ_m]`.
    pub fn costates(&self) -> [f64; 7] {
        [self.lambda[0], self.lambda[1], self.lambda[2], self.lambda[3], self.lambda[4], self.lambda[5], self.lambda_m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxConfig {
    pub gamma_c: f64,
    /// Evaluate the seven perturbations concurrently.
    pub parallel: bool,
}

impl Default for CxConfig {
    fn default() -> Self {
        Self { gamma_c: 1e-16, parallel: false }
    }
}

fn perturbed_hamiltonian<S: Scalar>(
    z: &FullState,
    i: usize,
    delta: S,
    t: f64,
    ctrl: &ControlPoint,
    model: &ForceModel,
    snap: &[BodySnapshot],
) -> Result<S> {
    let mut x: [S; 6] = z.x.to_array().map(S::from_real);
    let mut m = S::from_real(z.m);
    if i < 6 {
        x[i] = x[i] + delta;
    } else {
        m = m + delta;
    }
    hamiltonian(&x, m, &z.lambda, z.lambda_m, ctrl, t, model, snap)
}

/// `[λ̇_p … λ̇_l, λ̇_m]` by complex step with frozen controls.
pub fn costate_rates_cx(
    z: &FullState,
    t: f64,
    ctrl: &ControlPoint,
    model: &ForceModel,
    snap: &[BodySnapshot],
    cfg: &CxConfig,
) -> Result<[f64; 7]> {
    let gamma = cfg.gamma_c;
    let one = |i: usize| -> Result<f64> {
        let h = perturbed_hamiltonian(z, i, Complex64::new(0.0, gamma), t, ctrl, model, snap)?;
        Ok(-h.im / gamma)
    };
    let mut out = [0.0; 7];
    #[cfg(feature = "parallel")]
    if cfg.parallel {
        use rayon::prelude::*;
        let v: Vec<Result<f64>> = (0..7).into_par_iter().map(one).collect();
        for (o, r) in out.iter_mut().zip(v) {
            *o = r?;
        }
        return Ok(out);
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = one(i)?;
    }
    Ok(out)
}

/// λ̇_m = −(‖Bᵀλ‖/m²)(2ηP/c).
pub fn mass_costate_rate_analytic(x: &[f64; 6], m: f64, lambda: &[f64; 6], power: f64, c: f64, eta: f64, mu: f64) -> Result<f64> {
    let b = control_influence(x, mu)?;
    let n = norm(&bt_lambda(&b, lambda));
    Ok(-(n / (m * m)) * (2.0 * eta * power / c))
}

/// Central-difference gradient of the frozen-control Hamiltonian.
pub fn costate_rates_fd(
    z: &FullState,
    t: f64,
    ctrl: &ControlPoint,
    model: &ForceModel,
    snap: &[BodySnapshot],
    step: f64,
) -> Result<[f64; 7]> {
    let mut out = [0.0; 7];
    for (i, o) in out.iter_mut().enumerate() {
        let hp = perturbed_hamiltonian(z, i, step, t, ctrl, model, snap)?;
        let hm = perturbed_hamiltonian(z, i, -step, t, ctrl, model, snap)?;
        *o = -(hp - hm) / (2.0 * step);
    }
    Ok(out)
}
