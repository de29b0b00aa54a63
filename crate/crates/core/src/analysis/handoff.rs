//! Association-based handoff probability for a single-tier PPP with
//! nearest-BS association.
//!
//! The typical user starts at `u₀` served by a BS at distance `r`, then moves
//! a distance `v` at angle `θ` (θ = 0 is directly away from the BS). The
//! serving BS changes iff some other BS lies in `b(u₁, R) \ b(u₀, r)`.

use std::f64::consts::{FRAC_PI_2, PI};

use super::quadrature::{integrate_2d, QuadResult, QuadratureSpec};
use super::{require, AnalysisError};

/// Distance from the displaced user to the original serving BS,
/// `R = sqrt(r² + v² + 2rv·cos θ)`.
pub fn displaced_distance(r: f64, v: f64, theta: f64) -> f64 {
    (r * r + v * v + 2.0 * r * v * theta.cos()).max(0.0).sqrt()
}

/// `|b(u₁, R) \ b(u₀, r)|` where `|u₁ − u₀| = v`.
///
/// For `θ > π/2` with `v·cos(π − θ) > r` the user passes the BS and the
/// angle at `u₁` opens past `π/2`, so the arcsine picks its other branch.
pub fn lens_area(r: f64, v: f64, theta: f64) -> f64 {
    let passes = theta > FRAC_PI_2 && v * (PI - theta).cos() > r;
    lens_area_impl(r, v, theta, passes)
}

/// Same construction with the principal arcsine branch everywhere; wrong
/// whenever the user moves past its serving BS.
pub fn lens_area_uncorrected(r: f64, v: f64, theta: f64) -> f64 {
    lens_area_impl(r, v, theta, false)
}

fn lens_area_impl(r: f64, v: f64, theta: f64, other_branch: bool) -> f64 {
    let big_r = displaced_distance(r, v, theta);
    if big_r == 0.0 {
        return 0.0;
    }
    let s = (v * theta.sin() / big_r).clamp(-1.0, 1.0).asin();
    let phi = if other_branch { PI - s } else { s };
    let area = big_r * big_r * (PI - theta + phi) - r * r * (PI - theta) + r * v * theta.sin();
    area.max(0.0)
}

/// Area of the intersection of two disks with radii `r0`, `r1` and center distance `d`.
pub fn circle_intersection_area(r0: f64, r1: f64, d: f64) -> f64 {
    if r0 <= 0.0 || r1 <= 0.0 || d >= r0 + r1 {
        return 0.0;
    }
    if d <= (r0 - r1).abs() {
        let m = r0.min(r1);
        return PI * m * m;
    }
    let a0 = ((d * d + r0 * r0 - r1 * r1) / (2.0 * d * r0)).clamp(-1.0, 1.0).acos();
    let a1 = ((d * d + r1 * r1 - r0 * r0) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let k = (-d + r0 + r1) * (d + r0 - r1) * (d - r0 + r1) * (d + r0 + r1);
    r0 * r0 * a0 + r1 * r1 * a1 - 0.5 * k.max(0.0).sqrt()
}

/// `|b(c₁, r1) \ b(c₀, r0)|` for centers a distance `d` apart.
pub fn disk_difference_area(r0: f64, r1: f64, d: f64) -> f64 {
    (PI * r1 * r1 - circle_intersection_area(r0, r1, d)).max(0.0)
}

/// `P(H | r, θ) = 1 − exp(−λ·lens_area(r, v, θ))`.
pub fn handoff_prob_conditional(r: f64, theta: f64, v: f64, lambda: f64) -> f64 {
    -(-lambda * lens_area(r, v, theta)).exp_m1()
}

/// Conditional probability built on [`lens_area_uncorrected`].
pub fn handoff_prob_conditional_uncorrected(r: f64, theta: f64, v: f64, lambda: f64) -> f64 {
    -(-lambda * lens_area_uncorrected(r, v, theta)).exp_m1()
}

/// Angle beyond which a user starting at distance `r` passes its BS.
pub(crate) fn passing_angle(r: f64, v: f64) -> Option<f64> {
    (r < v).then(|| PI - (r / v).min(1.0).acos())
}

pub(crate) fn theta_breakpoints(r: f64, v: f64) -> Vec<f64> {
    let mut b = vec![FRAC_PI_2];
    b.extend(passing_angle(r, v));
    b
}

/// Unconditional handoff probability over one movement of length `v`:
/// `(1/π)∫₀^π ∫₀^∞ P(H|r,θ)·2πλr·e^{−λπr²} dr dθ`.
pub fn handoff_prob(v: f64, lambda: f64, quad: &QuadratureSpec) -> Result<QuadResult, AnalysisError> {
    require(v >= 0.0 && v.is_finite(), || format!("v = {v}"))?;
    require(lambda > 0.0 && lambda.is_finite(), || format!("lambda = {lambda}"))?;
    quad.validate()?;
    if v == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let r_max = quad.radial_cutoff(lambda);
    let mut q = integrate_2d(
        0.0,
        r_max,
        &[v],
        |r| (0.0, PI, theta_breakpoints(r, v)),
        |r, theta| {
            let w = 2.0 * lambda * r * (-lambda * PI * r * r).exp();
            w * handoff_prob_conditional(r, theta, v, lambda)
        },
        quad,
    )?;
    q.value = q.value.clamp(0.0, 1.0);
    q.error += quad.radial_tail_bound();
    Ok(q)
}
