//! Experiment runner for parnewton: JSON configs in, trace CSV and
//! summary/audit JSON out.

pub mod audit;
pub mod config;
pub mod error;
pub mod rates;
pub mod run;
pub mod trace;
pub mod truth;

pub use error::{exit, CliError, Result};
