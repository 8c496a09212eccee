use clap::{Args, Parser, Subcommand};
use csc_core::error::CscError;
use csc_core::oracle::cx_vs_fd;
use csc_core::run::{run_scenario, write_run};
use csc_core::scenario::{load_scenario, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "csc", version, about = "Fuel-optimal low-thrust trajectories by composite smooth control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write result files.
    Run(RunArgs),
    /// Validate a scenario file without solving.
    Check { scenario: PathBuf },
    /// Derivative cross-checks.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Subcommand)]
enum OracleKind {
    /// Complex-step costate rates against central differences.
    CxVsFd {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Model preset: 1 constant power, 2 array degradation, 3 degradation and planets.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: Option<u8>,
    /// Fixed revolution count.
    #[arg(long, conflicts_with = "nrev_range")]
    nrev: Option<u32>,
    /// Inclusive revolution range, e.g. 4..6.
    #[arg(long, value_parser = parse_range)]
    nrev_range: Option<(u32, u32)>,
    /// Final smoothing parameter.
    #[arg(long)]
    rho_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the scenario's).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative and absolute integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

fn exit_code(e: &CscError) -> u8 {
    match e {
        CscError::Io { .. } => EXIT_IO,
        CscError::NoConvergence { .. } | CscError::HomotopyAbort { .. } | CscError::Propagation { .. } => EXIT_NO_CONVERGENCE,
        CscError::DegenerateDirection(_) | CscError::DegenerateBlend(_) => EXIT_NO_CONVERGENCE,
        CscError::Config(_) | CscError::Domain(_) | CscError::Ephemeris(_) => EXIT_CONFIG,
    }
}

fn kind(e: &CscError) -> &'static str {
    match e {
        CscError::Domain(_) => "domain",
        CscError::DegenerateDirection(_) => "degenerate_direction",
        CscError::DegenerateBlend(_) => "degenerate_blend",
        CscError::Propagation { .. } => "propagation",
        CscError::NoConvergence { .. } => "no_convergence",
        CscError::HomotopyAbort { .. } => "homotopy_abort",
        CscError::Ephemeris(_) => "ephemeris",
        CscError::Config(_) => "config",
        CscError::Io { .. } => "io",
    }
}

fn fail(e: &CscError) -> ExitCode {
    let json = serde_json::json!({ "error": kind(e), "message": e.to_string() });
    eprintln!("{json}");
    ExitCode::from(exit_code(e))
}

fn apply_overrides(cfg: &mut ScenarioConfig, a: &RunArgs) -> Result<(), CscError> {
    if let Some(c) = a.case {
        cfg.set_case(c)?;
    }
    if let Some(n) = a.nrev {
        cfg.run.nrev = n;
        cfg.run.nrev_range = None;
    }
    if let Some((lo, hi)) = a.nrev_range {
        cfg.run.nrev_range = Some([lo, hi]);
    }
    if let Some(r) = a.rho_end {
        cfg.homotopy.rho_end = r;
    }
    if let Some(s) = a.seed {
        cfg.solver.seed = s;
    }
    if let Some(t) = a.tol {
        cfg.run.rel_tol = t;
        cfg.run.abs_tol = t;
    }
    if let Some(o) = &a.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()
}

fn run(a: RunArgs) -> ExitCode {
    let mut cfg = match load_scenario(&a.scenario) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Err(e) = apply_overrides(&mut cfg, &a) {
        return fail(&e);
    }
    log::info!("solving {} (N_rev {:?})", a.scenario.display(), cfg.nrevs());
    let out = match run_scenario(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => cfg.resolve(&cfg.output.dir),
    };
    if let Err(e) = write_run(&cfg, &out, &dir) {
        return fail(&e);
    }
    println!("{}", serde_json::to_string_pretty(&out.summary).unwrap_or_default());
    match &out.error {
        None => ExitCode::SUCCESS,
        Some(e) => fail(e),
    }
}

fn check(path: PathBuf) -> ExitCode {
    match load_scenario(&path).and_then(|c| c.problem().map(|p| (c, p))) {
        Ok((c, p)) => {
            println!(
                "{}: ok (case {}, tof {:.3} TU, N_rev {:?})",
                path.display(),
                c.case.map(|v| v.to_string()).unwrap_or_else(|| "custom".into()),
                p.tf,
                c.nrevs()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn oracle(path: PathBuf, samples: usize, seed: u64) -> ExitCode {
    let report = load_scenario(&path).and_then(|c| c.problem()).and_then(|p| cx_vs_fd(&p, samples, seed));
    match report {
        Ok(r) => {
            println!("max relative deviation (cx vs central difference): {:.3e}", r.max_relative_deviation);
            println!("cx spread across step sizes: {:.3e}", r.cx_spread);
            for (h, e) in &r.fd_curve {
                println!("  fd step {h:.0e}: worst relative error {e:.3e}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(a) => run(a),
        Command::Check { scenario } => check(scenario),
        Command::Oracle { kind: OracleKind::CxVsFd { scenario, samples, seed } } => oracle(scenario, samples, seed),
    }
}
