//! Handoff, coverage and sojourn-time analysis for mobile users in lattice
//! and Poisson cellular networks, cross-checked by Monte Carlo simulation.
//!
//! - [`geometry`]: deployments, association, boundary length intensity.
//! - [`mobility`]: random mobility models and their flight distributions.
//! - [`analysis`]: closed forms and quadratures.
//! - [`simulation`]: seeded, parallel Monte Carlo estimators.
//! - [`harness`]: experiment configs and the runner behind the CLI.

pub mod analysis;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod rng;
pub mod simulation;
pub mod stats;
