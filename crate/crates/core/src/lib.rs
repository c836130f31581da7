//! Estimation and planning core for a mobile sensor network that localizes a
//! stationary target while estimating its own agents' states without absolute
//! positioning.
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`models`]: SNR sensor and fixed-wing kinematics with analytic Jacobians.
//! - [`belief`]: particle filter over the target with a per-particle EKF bank
//!   over the agents.
//! - [`planner`]: Gaussian-approximated mutual-information action selection.
//! - [`noise`]: counter-based random streams for paired experiments.
//! - [`sim`]: ground truth and the closed-loop episode.
#![no_std]

extern crate alloc;

pub mod belief;
pub mod error;
pub mod models;
pub mod noise;
pub mod planner;
pub mod sim;

pub use error::{Error, Result};
