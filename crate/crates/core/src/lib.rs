//! Discrete-time simulation of controller synchronization in distributed SDN.
//!
//! A source controller routes flows across a linear chain of domains using its
//! (possibly stale) views of the remote domains. Each slot it may synchronize
//! with a budgeted number of remote controllers. This crate provides:
//!
//! - [`topology`]: multi-domain network generation and edge-rewire dynamics,
//! - [`sdncore`]: controller views, gateway-level path construction and the
//!   average path cost (APC) metric,
//! - [`env`]: the synchronization MDP (staleness state, budgeted actions, reward),
//! - [`dqn`]: an MLP Q-function trained with double Q-learning, a delayed
//!   target network and replay memory,
//! - [`schedulers`]: the DQ scheduler and the comparison policies,
//! - [`experiment`]: scenario configs, paired evaluation and CSV output.

pub mod dqn;
pub mod env;
mod error;
pub mod experiment;
pub mod rng;
pub mod schedulers;
pub mod sdncore;
pub mod topology;

pub use error::{Error, Result};
