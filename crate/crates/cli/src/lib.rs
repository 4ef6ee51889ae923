//! Batch front-end for `cpt-alloc-core`: config parsing and the
//! `solve`, `simulate`, `sweep`, `value` and `demo` commands.

pub mod commands;
pub mod config;

pub use commands::{AppError, SweepParam};
pub use config::{ConfigError, RateMode, RunConfig};
