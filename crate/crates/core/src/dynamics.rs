//! Equinoctial equations of motion, mass flow and the Hamiltonian.
//!
//! Everything here runs in canonical units and is generic over [`Scalar`].

use crate::canonical::{mee_to_cart_generic, CanonicalUnits};
use crate::control::ControlPoint;
use crate::costate::FullState;
use crate::engine::EngineModel;
use crate::ephemeris::{secondary_body_accel, Body, BodySnapshot, Ephemeris, PerturbationForm};
use crate::error::{CscError, Result};
use crate::power::PowerModel;
use crate::scalar::{lift, Scalar, Vec3};

/// Rows p, f, g, h, k, l; columns radial, transverse, normal.
pub type InfluenceMatrix<S> = [[S; 3]; 6];

#[inline]
fn w_of<S: Scalar>(x: &[S; 6]) -> Result<(S, S, S)> {
    let (sl, cl) = (x[5].sin(), x[5].cos());
    let w = x[1] * cl + x[2] * sl + 1.0;
    if !(w.re() > 0.0) || !(x[0].re() > 0.0) {
        return Err(CscError::Domain(format!("invalid elements: p = {}, w = {}", x[0].re(), w.re())));
    }
    Ok((w, sl, cl))
}

/// Two-body drift. Only the true-longitude rate is nonzero.
pub fn unforced_rates<S: Scalar>(x: &[S; 6], mu: f64) -> Result<[S; 6]> {
    let (w, _, _) = w_of(x)?;
    let p = x[0];
    let zero = S::from_real(0.0);
    let wp = w / p;
    Ok([zero, zero, zero, zero, zero, (p * mu).sqrt() * wp * wp])
}

/// Gauss variational influence matrix for equinoctial elements.
pub fn control_influence<S: Scalar>(x: &[S; 6], mu: f64) -> Result<InfluenceMatrix<S>> {
    let (w, sl, cl) = w_of(x)?;
    let [p, f, g, h, k, _] = *x;
    let zero = S::from_real(0.0);
    let q = (p / mu).sqrt();
    let qw = q / w;
    let s2 = h * h + k * k + 1.0;
    let hk = h * sl - k * cl;
    let wp1 = w + 1.0;
    Ok([
        [zero, qw * p * 2.0, zero],
        [q * sl, qw * (wp1 * cl + f), -(qw * g * hk)],
        [-(q * cl), qw * (wp1 * sl + g), qw * f * hk],
        [zero, zero, qw * s2 * cl * 0.5],
        [zero, zero, qw * s2 * sl * 0.5],
        [zero, zero, qw * hk],
    ])
}

/// `Bᵀλ` for real costates.
pub fn bt_lambda<S: Scalar>(b: &InfluenceMatrix<S>, lambda: &[f64; 6]) -> Vec3<S> {
    let mut out = [S::from_real(0.0); 3];
    for (row, &l) in b.iter().zip(lambda) {
        for j in 0..3 {
            out[j] = out[j] + row[j] * l;
        }
    }
    out
}

pub fn mat_vec<S: Scalar>(b: &InfluenceMatrix<S>, a: &Vec3<S>) -> [S; 6] {
    std::array::from_fn(|i| b[i][0] * a[0] + b[i][1] * a[1] + b[i][2] * a[2])
}

#[derive(Debug, Clone, Copy)]
pub struct RatesInput<S: Scalar> {
    pub x: [S; 6],
    pub m: S,
    /// LVLH, LU/TU².
    pub control_accel: Vec3<S>,
    /// LVLH, LU/TU².
    pub perturb_accel: Vec3<S>,
    pub mdot: S,
}

/// `[A + B (u_prop + a_sb); ṁ]`.
pub fn state_rates<S: Scalar>(input: &RatesInput<S>, mu: f64) -> Result<[S; 7]> {
    if !(input.m.re() > 0.0) {
        return Err(CscError::Domain(format!("mass {} <= 0", input.m.re())));
    }
    let a = unforced_rates(&input.x, mu)?;
    let b = control_influence(&input.x, mu)?;
    let acc = [
        input.control_accel[0] + input.perturb_accel[0],
        input.control_accel[1] + input.perturb_accel[1],
        input.control_accel[2] + input.perturb_accel[2],
    ];
    let ba = mat_vec(&b, &acc);
    let mut out = [S::from_real(0.0); 7];
    for i in 0..6 {
        out[i] = a[i] + ba[i];
    }
    out[6] = input.mdot;
    Ok(out)
}

/// Secondary-body perturbation settings bound to an ephemeris.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbations {
    pub ephemeris: Ephemeris,
    pub bodies: Vec<Body>,
    pub form: PerturbationForm,
    /// Minimum allowed spacecraft-body distance, LU.
    pub floor: f64,
}

/// Everything needed to evaluate the right-hand side in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceModel {
    pub units: CanonicalUnits,
    /// Engine with velocities and powers in canonical units.
    pub engine: EngineModel,
    /// Power model in SI units.
    pub power: PowerModel,
    pub perturbations: Option<Perturbations>,
    /// Re-evaluate the thruster power ceiling at the perturbed position when
    /// differentiating the Hamiltonian; when false the delivered power is frozen.
    pub power_coupling: bool,
}

impl ForceModel {
    pub fn mu(&self) -> f64 {
        self.units.mu()
    }

    /// Thruster power ceiling in canonical units at time `t` (TU) and radius `r` (LU = AU).
    pub fn p_max<S: Scalar>(&self, t: f64, r: S) -> Result<S> {
        let w = self.power.max_thruster_power(t * self.units.time_unit, r)?;
        Ok(w / self.units.power_unit())
    }

    /// Available power in watts.
    pub fn available_power_w(&self, t: f64, r: f64) -> Result<f64> {
        self.power.available_power(t * self.units.time_unit, r)
    }

    pub fn snapshot(&self, t: f64) -> Result<Vec<BodySnapshot>> {
        match &self.perturbations {
            Some(p) if !p.bodies.is_empty() => p.ephemeris.snapshot(&p.bodies, t),
            _ => Ok(Vec::new()),
        }
    }

    pub fn perturbation_lvlh<S: Scalar>(&self, x: &[S; 6], snap: &[BodySnapshot]) -> Result<Vec3<S>> {
        match &self.perturbations {
            Some(p) if !snap.is_empty() => {
                let (r, v) = mee_to_cart_generic(x, self.mu());
                secondary_body_accel(&r, &v, snap, p.form, p.floor)
            }
            _ => Ok([S::from_real(0.0); 3]),
        }
    }

    pub fn radius<S: Scalar>(&self, x: &[S; 6]) -> S {
        let w = x[1] * x[5].cos() + x[2] * x[5].sin() + 1.0;
        x[0] / w
    }
}

/// Hamiltonian in terms of explicit control values. `alpha_hat` is held real.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian_terms<S: Scalar>(
    x: &[S; 6],
    m: S,
    lambda: &[f64; 6],
    lambda_m: f64,
    alpha_hat: &Vec3<f64>,
    power: S,
    c: S,
    a_sb: &Vec3<S>,
    eta: f64,
    mu: f64,
) -> Result<S> {
    let a = unforced_rates(x, mu)?;
    let b = control_influence(x, mu)?;
    let thrust_acc = power * (2.0 * eta) / (c * m);
    let al: Vec3<S> = lift(alpha_hat);
    let acc = [
        thrust_acc * al[0] + a_sb[0],
        thrust_acc * al[1] + a_sb[1],
        thrust_acc * al[2] + a_sb[2],
    ];
    let ba = mat_vec(&b, &acc);
    let mut h = S::from_real(0.0);
    for i in 0..6 {
        h = h + (a[i] + ba[i]) * lambda[i];
    }
    Ok(h - power * (2.0 * eta * lambda_m) / (c * c))
}

/// Hamiltonian with controls frozen at `ctrl` (computed from the real state).
///
/// The thrust direction, exhaust velocity and throttle fraction never see the
/// perturbation in `x`/`m`. The secondary-body acceleration is re-evaluated,
/// and so is the power ceiling when `model.power_coupling` is set.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian<S: Scalar>(
    x: &[S; 6],
    m: S,
    lambda: &[f64; 6],
    lambda_m: f64,
    ctrl: &ControlPoint,
    t: f64,
    model: &ForceModel,
    snap: &[BodySnapshot],
) -> Result<S> {
    let power = if model.power_coupling {
        model.p_max(t, model.radius(x))? * ctrl.throttle
    } else {
        S::from_real(ctrl.input.power)
    };
    let a_sb = model.perturbation_lvlh(x, snap)?;
    hamiltonian_terms(
        x,
        m,
        lambda,
        lambda_m,
        &ctrl.input.alpha_hat,
        power,
        S::from_real(ctrl.input.exhaust_velocity),
        &a_sb,
        model.engine.eta,
        model.mu(),
    )
}

/// Real-valued Hamiltonian of a full state.
pub fn hamiltonian_real(z: &FullState, ctrl: &ControlPoint, t: f64, model: &ForceModel) -> Result<f64> {
    let snap = model.snapshot(t)?;
    hamiltonian(&z.x.to_array(), z.m, &z.lambda, z.lambda_m, ctrl, t, model, &snap)
}
