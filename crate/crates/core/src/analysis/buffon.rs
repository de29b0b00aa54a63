//! Handoff rates from the length intensity of cell boundaries (Buffon's needle).

use std::f64::consts::PI;

use super::{require, AnalysisError, MobilityMoments};

/// `μ₁ = 2/d` for a square lattice of spacing `d`.
pub fn square_lattice_length_intensity(d: f64) -> f64 {
    2.0 / d
}

/// `μ₁ = 2/(√3·d)` for a hexagonal lattice of cell side `d`: three sides of
/// length `d` per cell of area `(3√3/2)d²`.
pub fn hex_lattice_length_intensity(d: f64) -> f64 {
    2.0 / (3f64.sqrt() * d)
}

/// `μ₁ = 2√λ` for the Poisson–Voronoi tessellation.
pub fn ppp_length_intensity(lambda: f64) -> f64 {
    2.0 * lambda.sqrt()
}

/// `H = (2/π)·E[V]·μ₁·E[T]/(E[T]+E[S])`, handoffs per second for any
/// mobility model whose direction is uniform.
pub fn handoff_rate(mu1: f64, moments: MobilityMoments) -> Result<f64, AnalysisError> {
    require(mu1 >= 0.0 && mu1.is_finite(), || format!("mu1 = {mu1}"))?;
    moments.validate()?;
    Ok(2.0 / PI * moments.e_v * mu1 * moments.moving_fraction())
}

/// Rate for a user moving at speed `v` in the fixed direction `theta`
/// relative to the Buffon lines: `v·|sin θ|·μ₁·E[T]/(E[T]+E[S])`.
pub fn handoff_rate_directional(
    v: f64,
    theta: f64,
    mu1: f64,
    moments: MobilityMoments,
) -> Result<f64, AnalysisError> {
    require(v >= 0.0 && v.is_finite(), || format!("v = {v}"))?;
    require(theta.is_finite(), || format!("theta = {theta}"))?;
    require(mu1 >= 0.0 && mu1.is_finite(), || format!("mu1 = {mu1}"))?;
    moments.validate()?;
    Ok(v * theta.sin().abs() * mu1 * moments.moving_fraction())
}

/// Drone moving with a uniform 3-D velocity in the ball of radius `(4/3)v̄`
/// over a single-tier PPP: `E[v]·E[sin φ]·E|sin θ|·2√λ = v̄√λ`.
pub fn drone_handoff_rate(v_bar: f64, lambda: f64) -> Result<f64, AnalysisError> {
    require(v_bar >= 0.0 && v_bar.is_finite(), || format!("v_bar = {v_bar}"))?;
    require(lambda > 0.0 && lambda.is_finite(), || format!("lambda = {lambda}"))?;
    Ok(v_bar * lambda.sqrt())
}
