//! Dormand–Prince 5(4) with PI step-size control and 4th-order dense output.

use crate::error::{CscError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step allowed, as a fraction of the integration span.
    pub min_step_fraction: f64,
    pub safety: f64,
    pub beta: f64,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-12, max_steps: 2_000_000, min_step_fraction: 1e-14, safety: 0.9, beta: 0.04 }
    }
}

impl Dopri5Options {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (1e-16..=1e-3).contains(&v);
        if !ok(self.rtol) || !ok(self.atol) {
            return Err(CscError::Config(format!("integrator tolerances must lie in [1e-14, 1e-3] (got {}, {})", self.rtol, self.atol)));
        }
        Ok(())
    }
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub segments: Vec<DenseSegment<N>>,
}

impl<const N: usize> Solution<N> {
    /// Dense output at `t` inside the integrated span.
    pub fn sample(&self, t: f64) -> Option<[f64; N]> {
        let i = self.segments.partition_point(|s| s.t0 + s.h < t);
        let seg = self.segments.get(i.min(self.segments.len().saturating_sub(1)))?;
        Some(seg.eval(t))
    }

    /// Step boundaries, first is t0 and last is tf.
    pub fn step_times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.t0).collect();
        if let Some(s) = self.segments.last() {
            v.push(s.t0 + s.h);
        }
        v
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `tf` (`tf > t0`), landing exactly on `tf`.
pub fn integrate<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], tf: f64, opts: &Dopri5Options, dense: bool) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let span = tf - t0;
    if !(span > 0.0) {
        return Err(CscError::Domain("integration span must be positive".into()));
    }
    let wrap = |t: f64, e: CscError| match e {
        CscError::Propagation { .. } => e,
        other => CscError::Propagation { t, reason: other.to_string() },
    };
    let h_min = opts.min_step_fraction * span;
    let mut evals = 0usize;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y).map_err(|e| wrap(t, e))?;
    evals += 1;

    // Initial step guess.
    let sc0: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let d0 = (y.iter().zip(&sc0).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = (k1.iter().zip(&sc0).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span).max(h_min);

    let mut sol = Solution { t, y, accepted: 0, rejected: 0, evaluations: 0, segments: Vec::new() };
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let expo1 = 0.2 - opts.beta * 0.75;

    loop {
        if sol.accepted + sol.rejected >= opts.max_steps {
            return Err(CscError::Propagation { t, reason: "maximum step count exceeded".into() });
        }
        let last = t + h >= tf - 1e-15 * tf.abs().max(1.0);
        if last {
            h = tf - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)])).map_err(|e| wrap(t, e))?;
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)])).map_err(|e| wrap(t, e))?;
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)])).map_err(|e| wrap(t, e))?;
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)])).map_err(|e| wrap(t, e))?;
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last { tf } else { t + h };
        let k6 = f(t_new, &y6).map_err(|e| wrap(t, e))?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t_new, &y_new).map_err(|e| wrap(t, e))?;
        evals += 6;

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            sol.rejected += 1;
            if h.abs() < h_min {
                return Err(CscError::Propagation { t, reason: "non-finite error estimate".into() });
            }
            continue;
        }

        if err <= 1.0 {
            if dense {
                let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let r4: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                let r5: [f64; N] = std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                });
                sol.segments.push(DenseSegment { t0: t, h, rcont: [y, ydiff, bspl, r4, r5] });
            }
            sol.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                sol.t = t;
                sol.y = y;
                sol.evaluations = evals;
                return Ok(sol);
            }
            let err_c = err.max(1e-10);
            let mut fac = opts.safety * err_c.powf(-expo1) * err_old.powf(opts.beta);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err_c;
            h *= fac;
            last_rejected = false;
        } else {
            sol.rejected += 1;
            let fac = (opts.safety * err.powf(-expo1)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
        if h < h_min {
            return Err(CscError::Propagation { t, reason: format!("step size {h:e} below minimum {h_min:e}") });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kepler(_t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let r3 = (y[0] * y[0] + y[1] * y[1]).powf(1.5);
        Ok([y[2], y[3], -y[0] / r3, -y[1] / r3])
    }

    #[test]
    fn circular_closure() {
        let tau = std::f64::consts::TAU;
        let s = integrate(kepler, 0.0, [1.0, 0.0, 0.0, 1.0], tau, &Dopri5Options::with_tol(1e-12, 1e-12), false).unwrap();
        assert_eq!(s.t, tau);
        let d = ((s.y[0] - 1.0).powi(2) + s.y[1].powi(2)).sqrt();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn energy_drift_ten_revs() {
        let e: f64 = 0.4;
        let y0 = [1.0 - e, 0.0, 0.0, ((1.0 + e) / (1.0 - e)).sqrt()];
        let energy = |y: &[f64; 4]| 0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / (y[0] * y[0] + y[1] * y[1]).sqrt();
        let tf = 10.0 * std::f64::consts::TAU;
        let s = integrate(kepler, 0.0, y0, tf, &Dopri5Options::with_tol(1e-12, 1e-12), false).unwrap();
        let rel = ((energy(&s.y) - energy(&y0)) / energy(&y0)).abs();
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn dense_output_matches_nodes_and_exact() {
        let s = integrate(|_t, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 2.0, &Dopri5Options::with_tol(1e-10, 1e-10), true).unwrap();
        let times = s.step_times();
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 2.0);
        for k in 0..=40 {
            let t = 2.0 * k as f64 / 40.0;
            let v = s.sample(t).unwrap()[0];
            assert!((v - t.exp()).abs() < 1e-8 * t.exp(), "t={t}");
        }
    }

    #[test]
    fn failure_surfaces_time() {
        let r = integrate(
            |t, _y: &[f64; 1]| if t > 0.5 { Err(CscError::Domain("boom".into())) } else { Ok([1.0]) },
            0.0,
            [0.0],
            1.0,
            &Dopri5Options::default(),
            false,
        );
        match r {
            Err(CscError::Propagation { t, .. }) => assert!(t <= 0.5 + 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Dopri5Options::with_tol(1e-17, 1e-12).validate().is_err());
        assert!(Dopri5Options::with_tol(1e-12, 1e-12).validate().is_ok());
        assert!(Dopri5Options::with_tol(1e-15, 1e-15).validate().is_ok());
        assert!(Dopri5Options::with_tol(1e-12, 1e-2).validate().is_err());
    }
}
