//! Experiment harness around `mi-seeker-core`: configuration files, noise
//! sweeps with paired trials, result files, numerical self-checks and the
//! `mi-seeker` command-line tool.

pub mod check;
pub mod cli;
pub mod config;
pub mod montecarlo;
pub mod output;
pub mod report;
