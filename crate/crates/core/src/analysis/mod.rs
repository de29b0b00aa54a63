//! Closed-form and quadrature-based handoff, coverage and sojourn-time formulas.

mod buffon;
mod coverage;
mod handoff;
mod multitier;
pub mod quadrature;
mod sojourn;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use buffon::{
    drone_handoff_rate, handoff_rate, handoff_rate_directional, hex_lattice_length_intensity,
    ppp_length_intensity, square_lattice_length_intensity,
};
pub use coverage::{
    mobility_aware_coverage, mobility_aware_throughput, CoverageResult, CoverageSpec, Fading,
    JointCoverageTable, Throughput,
};
pub use handoff::{
    circle_intersection_area, disk_difference_area, displaced_distance, handoff_prob,
    handoff_prob_conditional, handoff_prob_conditional_uncorrected, lens_area,
    lens_area_uncorrected,
};
pub use multitier::{
    association_probabilities, multi_tier_handoff_prob, multi_tier_handoff_prob_with,
    multi_tier_no_handoff_prob, serving_distance_pdf, EquivalentTierMap, MultiTierHandoff,
    MultiTierMethod,
};
pub use quadrature::{integrate, QuadResult, QuadratureSpec};
pub use sojourn::{sojourn_time, sojourn_time_for_tiers};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature did not converge: value {value}, error estimate {error_estimate:e}")]
    Quadrature { value: f64, error_estimate: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), AnalysisError> {
    if cond {
        Ok(())
    } else {
        Err(AnalysisError::InvalidInput(msg()))
    }
}

/// First moments of a mobility model: mean speed, mean flight time, mean pause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityMoments {
    pub e_v: f64,
    pub e_t: f64,
    #[serde(default)]
    pub e_s: f64,
}

impl MobilityMoments {
    pub fn new(e_v: f64, e_t: f64, e_s: f64) -> Self {
        Self { e_v, e_t, e_s }
    }

    /// Constant-speed motion without pauses.
    pub fn no_pause(e_v: f64) -> Self {
        Self::new(e_v, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        require(self.e_v >= 0.0 && self.e_v.is_finite(), || format!("E[V] = {}", self.e_v))?;
        require(self.e_t > 0.0 && self.e_t.is_finite(), || format!("E[T] = {}", self.e_t))?;
        require(self.e_s >= 0.0, || format!("E[S] = {}", self.e_s))
    }

    /// Fraction of time spent moving, `E[T] / (E[T] + E[S])`; an infinite
    /// mean pause gives 0.
    pub fn moving_fraction(&self) -> f64 {
        if self.e_s.is_infinite() {
            return 0.0;
        }
        self.e_t / (self.e_t + self.e_s)
    }
}

/// One reportable analytical result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRecord {
    pub inputs: serde_json::Value,
    pub value: f64,
    pub error_estimate: f64,
    pub method: String,
}

impl AnalyticRecord {
    pub fn new(inputs: serde_json::Value, value: f64, error_estimate: f64, method: &str) -> Self {
        Self {
            inputs,
            value,
            error_estimate,
            method: method.to_string(),
        }
    }
}
