//! Base-station deployments (lattices and Poisson point processes), user
//! association, and Monte Carlo estimation of cell-boundary length intensity.

mod association;
mod boundary;
mod deployment;
mod index;
mod region;

use thiserror::Error;

pub use association::{association_probability_closed_form, serving_bs, AssociationPolicy};
pub use boundary::{estimate_length_intensity, BoundaryIntensityEstimate};
pub use deployment::{
    build_lattice, default_guard_band, mean_cell_radius, random_lattice_offset, sample_ppp, BsId,
    Deployment, LatticeKind, Layout, Tier, GUARD_RADII,
};
pub use region::Region;

/// 2-D coordinates in meters.
pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid tier: {0}")]
    InvalidTier(String),
    #[error("density must be positive and finite, got {0}")]
    InvalidDensity(f64),
    #[error("lattice spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("lattice spacing {d} is not smaller than the region extent {extent}")]
    LatticeTooCoarse { d: f64, extent: f64 },
    #[error("lattice offset {offset:?} lies outside the fundamental cell for d = {d}")]
    OffsetOutsideCell { offset: Point, d: f64 },
    #[error("deployment has no base stations")]
    EmptyDeployment,
    #[error("invalid boundary-intensity request: {0}")]
    InvalidEstimator(String),
    #[error("malformed deployment: {0}")]
    Malformed(String),
}
