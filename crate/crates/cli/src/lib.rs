//! Batch front end for `noncolliding-core`: kernel tables, correlation values,
//! verification suites and Monte Carlo campaigns.

pub mod campaign;
pub mod checks;
pub mod commands;
pub mod config;
pub mod format;
