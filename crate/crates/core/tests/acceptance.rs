//! Acceptance suite for the Earth–Dionysus benchmark: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`. Always exits successfully;
//! the verdicts are in the printed report.

use csc_core::bvp::*;
use csc_core::canonical::{cart_to_mee, lvlh_rotation, mee_to_cart, MeeState};
use csc_core::control::{c_op_unconstrained, clamp_exhaust_velocity, composite_exhaust_velocity, primer_direction};
use csc_core::dynamics::{bt_lambda, control_influence, hamiltonian_terms, ForceModel};
use csc_core::engine::EngineModel;
use csc_core::ephemeris::{third_body_accel_inertial, Body};
use csc_core::integrator::{integrate, Dopri5Options};
use csc_core::oracle::cx_vs_fd;
use csc_core::output::count_mode_transitions;
use csc_core::run::ISP_MODE_BAND;
use csc_core::scenario::{load_scenario, ScenarioConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

const CASE1_MF: f64 = 2848.1426;
const CASE2_MF: f64 = 2786.2428;
const MASS_BAND_KG: f64 = 3.0;
const FALLBACK_BAND: f64 = 0.005;
/// Multistart budget for revolution counts without a stored starting point.
const COLD_SAMPLES: usize = 6;
const COLD_ITERATIONS: usize = 30;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("criterion {id}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn info(&self, detail: String) {
        println!("    {detail}");
    }
}

fn scenario(case: u8) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/dionysus_case{case}.toml"));
    load_scenario(&path).expect("bundled scenario")
}

fn mass(r: &Result<HomotopyResult, csc_core::CscError>) -> Option<f64> {
    r.as_ref().ok().map(|h| h.final_mass_kg())
}

fn fmt_mass(m: Option<f64>) -> String {
    m.map(|v| format!("{v:.4} kg")).unwrap_or_else(|| "not converged".into())
}

fn isp_series(h: &HomotopyResult, cfg: &ScenarioConfig) -> Vec<f64> {
    let v = h.problem.model.units.velocity_unit();
    h.trajectory.samples.iter().map(|s| s.control.input.exhaust_velocity * v / cfg.constants.g0_m_s2).collect()
}

fn transversality(h: &HomotopyResult) -> f64 {
    (h.report.outcome.z_f.lambda_m + 1.0).abs()
}

/// Largest perturbing acceleration of each body along a trajectory, m/s².
fn perturbation_peaks(traj: &Trajectory, model: &ForceModel) -> Vec<(Body, f64)> {
    let p = model.perturbations.as_ref().expect("perturbation model");
    let au = model.units.acceleration_unit();
    let mut peaks: Vec<(Body, f64)> = p.bodies.iter().map(|b| (*b, 0.0)).collect();
    for s in traj.samples.iter().step_by(4) {
        let snap = p.ephemeris.snapshot(&p.bodies, s.t).expect("ephemeris");
        let r = mee_to_cart(&s.z.x, model.mu()).r;
        for (b, peak) in snap.iter().zip(peaks.iter_mut()) {
            let a = third_body_accel_inertial(&r, std::slice::from_ref(b), p.form, p.floor).expect("perturbation");
            peak.1 = peak.1.max((a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt() * au);
        }
    }
    peaks
}

fn strongest(peaks: &[(Body, f64)], set: &[Body]) -> Body {
    peaks.iter().filter(|(b, _)| set.contains(b)).max_by(|a, b| a.1.total_cmp(&b.1)).map(|(b, _)| *b).expect("non-empty set")
}

fn stage_mass(h: &HomotopyResult, rho: f64) -> Option<f64> {
    h.stages.iter().find(|s| (s.rho_b / rho - 1.0).abs() < 1e-9).map(|s| s.final_mass_kg)
}

fn property_suite(rep: &mut Report, transversality_worst: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut roundtrip: f64 = 0.0;
    let mut lvlh: f64 = 0.0;
    for _ in 0..2000 {
        let x = MeeState::new(
            rng.random_range(0.3..5.0),
            rng.random_range(-0.6..0.6),
            rng.random_range(-0.6..0.6),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let c = mee_to_cart(&x, 1.0);
        let back = mee_to_cart(&cart_to_mee(&c.r, &c.v, 1.0).expect("elliptic state"), 1.0);
        let rn = c.r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let vn = c.v.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..3 {
            roundtrip = roundtrip.max((back.r[i] - c.r[i]).abs() / rn).max((back.v[i] - c.v[i]).abs() / vn);
        }
        let m = lvlh_rotation(&c.r, &c.v).expect("non-degenerate frame");
        for p in 0..3 {
            for q in 0..3 {
                let d: f64 = (0..3).map(|k| m[p][k] * m[q][k]).sum();
                lvlh = lvlh.max((d - if p == q { 1.0 } else { 0.0 }).abs());
            }
        }
    }

    let mut stationarity: f64 = 0.0;
    for _ in 0..200 {
        let x = [
            rng.random_range(0.8..1.7),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
            rng.random_range(0.0..6.0),
        ];
        let lam: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let (m, lm) = (rng.random_range(0.6..1.0), rng.random_range(-1.0..-0.05));
        let b = control_influence(&x, 1.0).expect("regular state");
        let btl = bt_lambda(&b, &lam);
        let n = (btl[0] * btl[0] + btl[1] * btl[1] + btl[2] * btl[2]).sqrt();
        let alpha = primer_direction(&x, &lam, 1.0).expect("non-vanishing primer");
        let c_op = c_op_unconstrained(m, lm, n).expect("positive c_op");
        let h = 1e-20;
        let p = 0.014;
        let val = hamiltonian_terms(
            &x.map(Complex64::from),
            Complex64::from(m),
            &lam,
            lm,
            &alpha,
            Complex64::from(p),
            Complex64::new(c_op, h),
            &[Complex64::from(0.0); 3],
            0.65,
            1.0,
        )
        .expect("hamiltonian");
        let scale = p * 2.0 * 0.65 * n / (m * c_op * c_op);
        stationarity = stationarity.max((val.im / h).abs() / scale);
    }

    let e = EngineModel { eta: 1.0, c_min: -0.5, c_max: 0.5, p_min: 0.0, p_max: 1.0 };
    let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * std::f64::consts::TAU / 2000.0).collect();
    let worst: Vec<f64> = [1.0, 0.1, 0.01, 1e-3]
        .iter()
        .map(|&rho| {
            grid.iter()
                .map(|&x| 0.6 * x.sin())
                .filter(|c| (c.abs() - 0.5).abs() >= 0.05)
                .map(|c| (composite_exhaust_velocity(c, -0.5, 0.5, rho) - clamp_exhaust_velocity(c, &e)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let blend_ok = worst.windows(2).all(|w| w[1] < w[0]) && worst[3] < 1e-3;

    let ecc: f64 = 0.5;
    let y0 = [1.0 - ecc, 0.0, 0.0, ((1.0 + ecc) / (1.0 - ecc)).sqrt()];
    let kepler = |_t: f64, y: &[f64; 4]| {
        let r3 = (y[0] * y[0] + y[1] * y[1]).powf(1.5);
        Ok([y[2], y[3], -y[0] / r3, -y[1] / r3])
    };
    let sol = integrate(kepler, 0.0, y0, std::f64::consts::TAU, &Dopri5Options::with_tol(1e-13, 1e-13), false).expect("kepler");
    let closure = ((sol.y[0] - y0[0]).powi(2) + (sol.y[1] - y0[1]).powi(2)).sqrt();

    let blend = worst.iter().map(|w| format!("{w:.1e}")).collect::<Vec<_>>().join(", ");
    let ok = roundtrip <= 1e-11 && lvlh <= 1e-13 && stationarity <= 1e-10 && blend_ok && closure <= 1e-9 && transversality_worst <= 1e-10;
    rep.line(
        "8",
        ok,
        format!(
            "roundtrip {roundtrip:.1e}, LVLH {lvlh:.1e}, dH/dc {stationarity:.1e}, blend-vs-clamp [{}], Kepler closure {closure:.1e} LU, |λm(tf)+1| {transversality_worst:.1e}",
            blend
        ),
    );
}

fn main() {
    let start = Instant::now();
    let mut rep = Report { failures: 0 };
    let c1 = scenario(1);
    let c2 = scenario(2);
    let c3 = scenario(3);
    let mut worst_transversality: f64 = 0.0;

    // Case 1 over the revolution range: criteria 1, 4 and 7.
    let mut cold = c1.solver;
    cold.multistart_samples = COLD_SAMPLES;
    cold.multistart_iterations = COLD_ITERATIONS;
    let p1 = c1.problem().expect("case 1 problem");
    let t = Instant::now();
    let sweep1 = nrev_sweep(&p1, &[4, 5, 6], &c1.homotopy, &cold, |n| c1.guess_for(n));
    let (m1, best, case1_best) = match &sweep1 {
        Ok(s) => {
            for o in &s.outcomes {
                rep.info(format!("case 1, N_rev = {}: {}", o.nrev, fmt_mass(mass(&o.result))));
                if let Ok(h) = &o.result {
                    worst_transversality = worst_transversality.max(transversality(h));
                }
            }
            let five = s.outcomes.iter().find(|o| o.nrev == 5).and_then(|o| mass(&o.result));
            (five, Some(s.best), Some(s.best_result().final_mass_kg()))
        }
        Err(e) => {
            rep.info(format!("case 1 sweep failed: {e}"));
            (None, None, None)
        }
    };
    rep.info(format!("case 1 sweep: {:.0} s", t.elapsed().as_secs_f64()));
    rep.line(
        "1",
        m1.is_some_and(|m| (m - CASE1_MF).abs() <= MASS_BAND_KG),
        format!("case 1, N_rev = 5: {} (expected {CASE1_MF} ± {MASS_BAND_KG})", fmt_mass(m1)),
    );

    // Case 2: criterion 2.
    let t = Instant::now();
    let p2 = c2.problem().expect("case 2 problem");
    let h2 = homotopy_sweep(&p2.with_nrev(5), &c2.homotopy, &c2.solver, c2.guess_for(5).as_ref());
    let h2_six = homotopy_sweep(&p2.with_nrev(6), &c2.homotopy, &c2.solver, c2.guess_for(6).as_ref());
    let m2 = mass(&h2);
    for h in [&h2, &h2_six].into_iter().flatten() {
        worst_transversality = worst_transversality.max(transversality(h));
    }
    rep.info(format!("case 2, N_rev = 6: {}; case 2 solves: {:.0} s", fmt_mass(mass(&h2_six)), t.elapsed().as_secs_f64()));
    let delta = m1.zip(m2).map(|(a, b)| a - b);
    rep.line(
        "2",
        m2.is_some_and(|m| (m - CASE2_MF).abs() <= MASS_BAND_KG) && delta.is_some_and(|d| (55.0..=70.0).contains(&d)),
        format!(
            "case 2, N_rev = 5: {} (expected {CASE2_MF} ± {MASS_BAND_KG}); case 1 − case 2 = {} (expected 55..70 kg)",
            fmt_mass(m2),
            delta.map(|d| format!("{d:.2} kg")).unwrap_or_else(|| "n/a".into())
        ),
    );

    // Case 3 warm-started from the converged case 2 costates: criteria 3 and 5.
    let t = Instant::now();
    let p3 = c3.problem().expect("case 3 problem").with_nrev(5);
    let final_rho = c3.homotopy.params(c3.homotopy.rho_end);
    let h3 = match &h2 {
        Ok(h) => {
            let q = p3.with_rho(final_rho);
            levenberg_marquardt(&h.eta0(), &q, &c3.solver, c3.solver.max_iterations, None).and_then(|r| {
                let traj = propagate(&q.initial_state(&r.eta0), q.t0, q.tf, &q.tolerances, &q)?;
                Ok((r, traj))
            })
        }
        Err(e) => Err(e.clone()),
    };
    rep.info(format!("case 3 solve: {:.0} s", t.elapsed().as_secs_f64()));
    let m3 = h3.as_ref().ok().and_then(|(_, tr)| tr.final_state()).map(|z| z.m * c3.boundary.m0_kg);
    let ordering = match &h2 {
        Ok(h) => {
            let peaks = perturbation_peaks(&h.trajectory, &p3.model);
            let outer = strongest(&peaks, &[Body::Jupiter, Body::Saturn, Body::Uranus, Body::Neptune]);
            let inner = strongest(&peaks, &[Body::Mercury, Body::Venus, Body::Earth, Body::Mars]);
            rep.info(format!(
                "peak perturbations along the case 2 path: {}",
                peaks.iter().map(|(b, a)| format!("{} {a:.2e}", b.name())).collect::<Vec<_>>().join(", ")
            ));
            Some(outer == Body::Jupiter && inner == Body::Earth)
        }
        Err(_) => None,
    };
    let d3 = m3.zip(m2).map(|(a, b)| (a - b).abs());
    rep.line(
        "3",
        d3.is_some_and(|d| d <= 1.0) && ordering == Some(true),
        format!(
            "case 3: {}; |case 3 − case 2| = {}; Jupiter/Earth strongest: {}",
            match &h3 {
                Ok(_) => fmt_mass(m3),
                Err(e) => format!("not converged ({e})"),
            },
            d3.map(|d| format!("{d:.4} kg")).unwrap_or_else(|| "n/a".into()),
            ordering.map(|o| o.to_string()).unwrap_or_else(|| "n/a".into())
        ),
    );

    rep.line(
        "4",
        best == Some(5),
        format!(
            "best N_rev over {{4, 5, 6}}: {} ({}); N_rev = 4 from {COLD_SAMPLES} random starts of {COLD_ITERATIONS} iterations",
            best.map(|b| b.to_string()).unwrap_or_else(|| "none".into()),
            fmt_mass(case1_best)
        ),
    );

    match &h3 {
        Ok((_, traj)) => {
            let v = p3.model.units.velocity_unit();
            let isp: Vec<f64> = traj.samples.iter().map(|s| s.control.input.exhaust_velocity * v / c3.constants.g0_m_s2).collect();
            let switches = count_mode_transitions(&isp, c3.engine.isp_min_s, c3.engine.isp_max_s, ISP_MODE_BAND);
            let s_min = traj.samples.iter().map(|s| s.control.switching).fold(f64::INFINITY, f64::min);
            rep.line("5", (12..=20).contains(&switches) && s_min > 0.0, format!("case 3 Isp transitions {switches} (expected 16 ± 4), min S {s_min:.3e}"));
        }
        Err(_) => {
            rep.line("5", false, "case 3 did not converge; no profile to classify".into());
        }
    }
    if let Ok(h) = &h2 {
        let isp = isp_series(h, &c2);
        let s_min = h.trajectory.samples.iter().map(|s| s.control.switching).fold(f64::INFINITY, f64::min);
        rep.info(format!(
            "case 2 profile for reference: {} Isp transitions, min S {s_min:.3e}, Isp range [{:.3}, {:.3}] s",
            count_mode_transitions(&isp, c2.engine.isp_min_s, c2.engine.isp_max_s, ISP_MODE_BAND),
            isp.iter().cloned().fold(f64::INFINITY, f64::min),
            isp.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        ));
    }

    // Derivative oracle: criterion 6.
    let t = Instant::now();
    let oracle_problem = c3.problem().expect("case 3 problem");
    match cx_vs_fd(&oracle_problem, 100, 7) {
        Ok(r) => {
            let u = r.fd_is_u_shaped();
            rep.line(
                "6",
                r.max_relative_deviation <= 1e-6 && r.cx_spread <= 1e-12 && u,
                format!(
                    "cx vs central difference {:.2e}, cx spread {:.2e}, FD U-shaped {u} ({:.1} s)",
                    r.max_relative_deviation,
                    r.cx_spread,
                    t.elapsed().as_secs_f64()
                ),
            );
            rep.info(format!("FD error curve: {}", r.fd_curve.iter().map(|(h, e)| format!("{h:.0e}:{e:.1e}")).collect::<Vec<_>>().join(" ")));
        }
        Err(e) => rep.line("6", false, format!("oracle failed: {e}")),
    }

    // Smoothing convergence: criterion 7.
    let five = sweep1.as_ref().ok().and_then(|s| s.outcomes.iter().find(|o| o.nrev == 5)).and_then(|o| o.result.as_ref().ok());
    let pair = five.and_then(|h| stage_mass(h, 1e-4).zip(stage_mass(h, 1e-5)));
    rep.line(
        "7",
        pair.is_some_and(|(a, b)| (a - b).abs() < 0.1),
        match pair {
            Some((a, b)) => format!("case 1, N_rev = 5: m_f(1e-4) = {a:.4} kg, m_f(1e-5) = {b:.4} kg, gap {:.2e} kg", (a - b).abs()),
            None => "stage records unavailable".into(),
        },
    );
    // The first stage starts from a stored root, so there is no cold stage to compare against.
    for h in [five, h2.as_ref().ok()].into_iter().flatten() {
        rep.info(format!(
            "stage iterations (ρ: its): {}",
            h.stages.iter().map(|s| format!("{:.0e}: {}", s.rho_b, s.iterations)).collect::<Vec<_>>().join(", ")
        ));
    }

    property_suite(&mut rep, worst_transversality);

    let fallback = match (m1, m2, m3) {
        (Some(a), Some(b), Some(c)) => {
            (a - CASE1_MF).abs() <= FALLBACK_BAND * CASE1_MF && (b - CASE2_MF).abs() <= FALLBACK_BAND * CASE2_MF && a > b && (b - c).abs() <= 1.0
        }
        _ => false,
    };
    rep.info(format!("fallback band (±0.5% on cases 1 and 2 with m_f(1) > m_f(2) ≈ m_f(3)): {}", if fallback { "met" } else { "not met" }));
    println!("{} failing criteria; total {:.0} s", rep.failures, start.elapsed().as_secs_f64());
}
