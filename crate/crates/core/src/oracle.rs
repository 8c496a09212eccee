//! Cross-check of complex-step costate rates against central differences.

use crate::bvp::ShootingProblem;
use crate::canonical::MeeState;
use crate::control::compute_controls;
use crate::costate::{costate_rates_cx, costate_rates_fd, CxConfig, FullState};
use crate::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Complex-step sizes compared for flatness.
pub const CX_STEPS: [f64; 4] = [1e-10, 1e-14, 1e-16, 1e-20];
/// Central-difference steps scanned for the error curve.
pub const FD_STEPS: [f64; 9] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
/// Step used for the headline comparison.
pub const FD_REFERENCE_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub samples: usize,
    /// Largest normwise relative gap between complex-step and central-difference rates.
    pub max_relative_deviation: f64,
    /// Largest relative spread of the complex-step rates across [`CX_STEPS`].
    pub cx_spread: f64,
    /// `(step, worst relative error)` of central differences across [`FD_STEPS`].
    pub fd_curve: Vec<(f64, f64)>,
}

impl OracleReport {
    /// Error is larger at both ends of the step scan than at its minimum.
    pub fn fd_is_u_shaped(&self) -> bool {
        let (i, min) = self
            .fd_curve
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &(_, e))| if e < acc.1 { (i, e) } else { acc });
        let n = self.fd_curve.len();
        i > 0 && i + 1 < n && self.fd_curve[0].1 > 10.0 * min && self.fd_curve[n - 1].1 > 10.0 * min
    }
}

/// A random state-costate point on the scale of the heliocentric benchmark.
pub fn random_state(rng: &mut ChaCha8Rng, tf: f64) -> (FullState, f64) {
    let x = MeeState::new(
        rng.random_range(0.8..1.7),
        rng.random_range(-0.3..0.3),
        rng.random_range(-0.3..0.3),
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
        rng.random_range(0.0..40.0),
    );
    let z = FullState {
        x,
        m: rng.random_range(0.6..1.0),
        lambda: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
        lambda_m: rng.random_range(-1.0..-0.05),
    };
    (z, rng.random_range(0.0..tf))
}

fn rel(a: &[f64; 7], b: &[f64; 7]) -> f64 {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn cx_vs_fd(problem: &ShootingProblem, samples: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = &problem.model;
    let mut max_dev = 0.0_f64;
    let mut spread = 0.0_f64;
    let mut fd_err = vec![0.0_f64; FD_STEPS.len()];
    let mut used = 0;
    while used < samples {
        let (z, t) = random_state(&mut rng, problem.tf);
        let Ok(ctrl) = compute_controls(&z, t, model, &problem.gates, &problem.rho) else { continue };
        let snap = model.snapshot(t)?;
        let reference = costate_rates_cx(&z, t, &ctrl, model, &snap, &CxConfig { gamma_c: 1e-16, parallel: false })?;
        for g in CX_STEPS {
            let v = costate_rates_cx(&z, t, &ctrl, model, &snap, &CxConfig { gamma_c: g, parallel: false })?;
            spread = spread.max(rel(&reference, &v));
        }
        let fd = costate_rates_fd(&z, t, &ctrl, model, &snap, FD_REFERENCE_STEP)?;
        max_dev = max_dev.max(rel(&reference, &fd));
        for (e, &h) in fd_err.iter_mut().zip(&FD_STEPS) {
            let fd = costate_rates_fd(&z, t, &ctrl, model, &snap, h)?;
            *e = e.max(rel(&reference, &fd));
        }
        used += 1;
    }
    Ok(OracleReport {
        samples,
        max_relative_deviation: max_dev,
        cx_spread: spread,
        fd_curve: FD_STEPS.iter().cloned().zip(fd_err).collect(),
    })
}
