//! Config-driven experiment runner for open billiards.

// `!(x < limit)` is used on purpose: a NaN statistic counts as a breach.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod experiment;
pub mod output;

pub use commands::{execute, Cli};
pub use config::ExperimentConfig;
