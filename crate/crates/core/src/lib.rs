//! Monte Carlo simulator of directional initial-access cell search in
//! mm-Wave cellular networks.
//!
//! - [`beams`]: flat-top analog beam codebooks.
//! - [`channel`]: statistical LOS/NLOS/outage channel and link budget.
//! - [`procedures`]: exhaustive, iterative and context-information searches.
//! - [`montecarlo`]: PMD estimation, sweeps and the min-T_sig solver.
//! - [`cli`]: config files, CSV output and the command-line runner.

// `!(x >= lo)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beams;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod procedures;

pub use error::{Error, Result};
