//! Single-shooting solution of the state-costate boundary-value problem.

mod homotopy;
mod problem;
mod solver;

pub use homotopy::{homotopy_sweep, nrev_sweep, HomotopyResult, HomotopySchedule, NrevOutcome, NrevSweep, StageRecord};
pub use problem::{
    full_rates, full_rates_with_controls, propagate, propagate_endpoint, shooting_residual, PropagationTolerances,
    ShootingOutcome, ShootingProblem, Trajectory, TrajectorySample, MIN_OUTPUT_SAMPLES,
};
pub use solver::{levenberg_marquardt, lm_offset, multistart, newton_homotopy, multistart_guesses, solve_tpbvp, SolveReport, SolverConfig};
