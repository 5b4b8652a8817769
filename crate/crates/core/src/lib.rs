//! Multi-UAV farmland simulation with deep Q-learning agents.
//!
//! The crate is organised bottom-up: [`physics`] holds the energy and radio
//! link models, [`env`] the grid-world built on them, [`nn`] a small dense
//! network stack, [`trainer`] the DQN / double DQN / triple-network learners
//! with elite imitation, [`baselines`] full-knowledge route planners, and
//! [`harness`] the configuration, experiment runner and CSV export.

pub mod baselines;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod physics;
pub mod rl;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
