//! Composite smooth control indirect optimizer for low-thrust trajectories
//! with variable-Isp, variable-thrust engines.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod canonical;
pub mod control;
pub mod costate;
pub mod dynamics;
pub mod engine;
pub mod ephemeris;
pub mod error;
pub mod integrator;
pub mod oracle;
pub mod output;
pub mod power;
pub mod run;
pub mod scalar;
pub mod scenario;

pub use error::{CscError, Result};
