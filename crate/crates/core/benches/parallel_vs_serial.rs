use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use csc_core::bvp::{levenberg_marquardt, multistart_guesses, shooting_residual, PropagationTolerances, SolverConfig};
use csc_core::control::{compute_controls, SmoothingParams};
use csc_core::costate::{costate_rates_cx, CxConfig};
use csc_core::oracle::random_state;
use csc_core::scenario::benchmark;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const ROOT: [f64; 7] = [
    -0.37836438636802355,
    -0.1480848906292606,
    0.5396863514040379,
    -0.2853017788965921,
    -1.416124548549672,
    0.009849800290127912,
    -0.3088623659216031,
];

/// One Levenberg–Marquardt iteration: a 7-column finite-difference Jacobian plus a step.
fn shooting_jacobian(c: &mut Criterion) {
    let cfg = benchmark(1).unwrap();
    let mut p = cfg.problem().unwrap().with_nrev(5).with_rho(SmoothingParams::uniform(1.0));
    p.tolerances = PropagationTolerances { rel_tol: 1e-10, abs_tol: 1e-10 };
    let start = ROOT.map(|v| v * 1.001);
    let mut g = c.benchmark_group("shooting_jacobian");
    g.sample_size(10);
    for parallel in [false, true] {
        let s = SolverConfig { parallel, tol: 1e-300, ..cfg.solver };
        let name = if parallel { "parallel" } else { "serial" };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| levenberg_marquardt(black_box(&start), &p, &s, 1, None)));
    }
    g.finish();
}

/// Residual screening of random guesses, the first phase of multistart.
fn multistart_screening(c: &mut Criterion) {
    let cfg = benchmark(1).unwrap();
    let mut p = cfg.problem().unwrap().with_nrev(5).with_rho(SmoothingParams::uniform(1.0));
    p.tolerances = PropagationTolerances { rel_tol: 1e-9, abs_tol: 1e-9 };
    let guesses = multistart_guesses(42, 8, 1.0);
    let mut g = c.benchmark_group("multistart_screening");
    g.sample_size(10);
    g.bench_function("serial", |b| {
        b.iter(|| guesses.iter().map(|e| shooting_residual(e, &p).map(|o| o.norm_inf()).ok()).collect::<Vec<_>>())
    });
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| {
        use rayon::prelude::*;
        b.iter(|| guesses.par_iter().map(|e| shooting_residual(e, &p).map(|o| o.norm_inf()).ok()).collect::<Vec<_>>())
    });
    g.finish();
}

/// Complex-step costate rates, one perturbed evaluation per state component.
fn costate_rates(c: &mut Criterion) {
    let cfg = benchmark(3).unwrap();
    let p = cfg.problem().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (z, t) = random_state(&mut rng, p.tf);
    let ctrl = compute_controls(&z, t, &p.model, &p.gates, &p.rho).unwrap();
    let snap = p.model.snapshot(t).unwrap();
    let mut g = c.benchmark_group("costate_rates_cx");
    for parallel in [false, true] {
        let cx = CxConfig { gamma_c: 1e-16, parallel };
        let name = if parallel { "parallel" } else { "serial" };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| costate_rates_cx(black_box(&z), t, &ctrl, &p.model, &snap, &cx)));
    }
    g.finish();
}

criterion_group!(benches, shooting_jacobian, multistart_screening, costate_rates);
criterion_main!(benches);
