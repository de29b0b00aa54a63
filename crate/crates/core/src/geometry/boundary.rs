//! Length intensity of cell boundaries from the area intensity of the
//! boundaries' Δd-neighbourhood: `μ₁ ≈ P(u within Δd of a boundary) / (2Δd)`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{serving_bs, AssociationPolicy, BsId, Deployment, GeometryError, Point};
use crate::rng::rng_from_seed;

const PROBE_DIRECTIONS: usize = 8;
/// Neighbouring probe rays may have to travel this many probe radii to reach
/// a boundary that the primary ray crossed.
const PAIR_REACH: f64 = 3.0;
const BISECTION_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryIntensityEstimate {
    /// Estimated boundary length per unit area (1/m).
    pub mu1_hat: f64,
    pub delta_d: f64,
    pub samples: usize,
    pub ci95_halfwidth: f64,
    /// Fraction of sample points found within `delta_d` of a boundary.
    pub boundary_fraction: f64,
}

/// Spatial-average estimate of `μ₁` over uniform points of the deployment region.
pub fn estimate_length_intensity(
    dep: &Deployment,
    policy: AssociationPolicy,
    delta_d: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BoundaryIntensityEstimate, GeometryError> {
    if !(delta_d > 0.0) || !delta_d.is_finite() {
        return Err(GeometryError::InvalidEstimator(format!(
            "delta_d must be positive, got {delta_d}"
        )));
    }
    if n_samples < 10_000 {
        return Err(GeometryError::InvalidEstimator(format!(
            "at least 10^4 samples are required, got {n_samples}"
        )));
    }
    if dep.is_empty() {
        return Err(GeometryError::EmptyDeployment);
    }
    let region = dep.region();
    let mut rng = rng_from_seed(seed);
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let u = region.sample_uniform(&mut rng);
        if within_boundary_band(u, dep, policy, delta_d)? {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let p = hits as f64 / n;
    if p > 0.5 {
        warn!(
            boundary_fraction = p,
            delta_d, "delta_d is large relative to the cell size; estimate is biased"
        );
    }
    let se = (p * (1.0 - p) / n).sqrt();
    Ok(BoundaryIntensityEstimate {
        mu1_hat: p / (2.0 * delta_d),
        delta_d,
        samples: n_samples,
        ci95_halfwidth: 1.96 * se / (2.0 * delta_d),
        boundary_fraction: p,
    })
}

/// Whether `u` lies within perpendicular distance `delta_d` of the boundary of
/// its serving cell.
///
/// Eight rays of length `delta_d / cos(π/8)` are probed first: every straight
/// boundary closer than `delta_d` is crossed by at least one of them. For rays
/// that change the serving BS, the crossing point is located by bisection, and
/// the boundary is reconstructed locally as the line through the crossings of
/// adjacent rays; the perpendicular distance to that line decides membership.
pub(crate) fn within_boundary_band(
    u: Point,
    dep: &Deployment,
    policy: AssociationPolicy,
    delta_d: f64,
) -> Result<bool, GeometryError> {
    let home = serving_bs(u, dep, policy)?;
    let probe = delta_d / (PI / 8.0).cos();
    let dirs: [Point; PROBE_DIRECTIONS] =
        std::array::from_fn(|i| [(i as f64 * FRAC_PI_4).cos(), (i as f64 * FRAC_PI_4).sin()]);

    let mut any = false;
    for d in &dirs {
        if serving_bs(at(u, *d, probe), dep, policy)? != home {
            any = true;
            break;
        }
    }
    if !any {
        return Ok(false);
    }

    let mut crossings: [Option<f64>; PROBE_DIRECTIONS] = [None; PROBE_DIRECTIONS];
    for (i, d) in dirs.iter().enumerate() {
        crossings[i] = first_change(u, *d, PAIR_REACH * probe, home, dep, policy)?;
        if let Some(s) = crossings[i] {
            if s < delta_d {
                return Ok(true);
            }
        }
    }
    for i in 0..PROBE_DIRECTIONS {
        let j = (i + 1) % PROBE_DIRECTIONS;
        if let (Some(si), Some(sj)) = (crossings[i], crossings[j]) {
            let a = at(u, dirs[i], si);
            let b = at(u, dirs[j], sj);
            if distance_to_line(u, a, b) < delta_d {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn at(u: Point, dir: Point, s: f64) -> Point {
    [u[0] + s * dir[0], u[1] + s * dir[1]]
}

/// Distance along the ray at which the serving BS first differs from `home`,
/// if it does so within `reach`.
fn first_change(
    u: Point,
    dir: Point,
    reach: f64,
    home: BsId,
    dep: &Deployment,
    policy: AssociationPolicy,
) -> Result<Option<f64>, GeometryError> {
    if serving_bs(at(u, dir, reach), dep, policy)? == home {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, reach);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if serving_bs(at(u, dir, mid), dep, policy)? == home {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn distance_to_line(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = (dx * dx + dy * dy).sqrt();
    if len == 0.0 {
        return ((p[0] - a[0]).powi(2) + (p[1] - a[1]).powi(2)).sqrt();
    }
    ((p[0] - a[0]) * dy - (p[1] - a[1]) * dx).abs() / len
}
