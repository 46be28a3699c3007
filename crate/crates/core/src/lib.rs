//! Discrete-time simulator for age-of-information constrained power
//! minimization in a multi-sensor uplink.
//!
//! A central controller decides each slot which sensors sample, how the
//! orthogonal sub-channels are split among them and how much power goes on
//! each sub-channel. Average AoI limits are enforced through virtual queues
//! and a drift-plus-penalty rule; the resulting per-slot mixed-integer
//! problem is solved either by sampling enumeration with greedy assignment
//! and water-filling, or by exhaustive search on small instances.
//!
//! Module map:
//!
//! * [`channel`]: path loss plus Rayleigh block fading, counter-based seeding.
//! * [`aoi`]: AoI and virtual-queue recursions, Lyapunov function, weights.
//! * [`solver`]: water-filling, greedy assignment, per-slot solvers.
//! * [`controller`]: drift-plus-penalty and fixed-rate policies.
//! * [`config`], [`sim`], [`sweep`], [`output`]: the experiment harness.

pub mod aoi;
pub mod channel;
pub mod config;
pub mod controller;
pub mod error;
pub mod output;
pub mod sim;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
