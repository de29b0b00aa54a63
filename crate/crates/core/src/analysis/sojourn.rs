//! Mean sojourn time within one movement period.
//!
//! Voronoi cells of a single-tier PPP are convex, so a user moving in a
//! straight line is still in its first cell at time `t` iff the serving BS at
//! `t` equals the initial one. Hence `S̄ = ∫₀^T P(no handoff by t) dt =
//! T − ∫₀^T P(H | vt) dt`.

use super::handoff::handoff_prob;
use super::quadrature::{integrate, QuadResult, QuadratureSpec};
use super::{require, AnalysisError};
use crate::geometry::Tier;

pub fn sojourn_time(v: f64, period: f64, lambda: f64, quad: &QuadratureSpec) -> Result<QuadResult, AnalysisError> {
    require(v >= 0.0 && v.is_finite(), || format!("v = {v}"))?;
    require(period > 0.0 && period.is_finite(), || format!("T = {period}"))?;
    require(lambda > 0.0 && lambda.is_finite(), || format!("lambda = {lambda}"))?;
    quad.validate()?;
    if v == 0.0 {
        return Ok(QuadResult {
            value: period,
            error: 0.0,
            evaluations: 0,
        });
    }
    let inner = quad.tightened(0.1);
    let mut failure = None;
    let mut inner_err: f64 = 0.0;
    let mut evaluations = 0;
    let outer_spec = QuadratureSpec {
        abs_tol: quad.abs_tol * period,
        ..*quad
    };
    let q = integrate(
        |t| match handoff_prob(v * t, lambda, &inner) {
            Ok(p) => {
                inner_err = inner_err.max(p.error);
                evaluations += p.evaluations;
                p.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        period,
        &[],
        &outer_spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let q = q?;
    let value = (period - q.value).clamp(0.0, period);
    Ok(QuadResult {
        value,
        error: q.error + period * inner_err,
        evaluations: evaluations + q.evaluations,
    })
}

/// [`sojourn_time`] for a tier list; only a single tier is supported because
/// multi-tier cells need not be convex.
pub fn sojourn_time_for_tiers(
    v: f64,
    period: f64,
    tiers: &[Tier],
    quad: &QuadratureSpec,
) -> Result<QuadResult, AnalysisError> {
    match tiers {
        [t] => sojourn_time(v, period, t.density, quad),
        _ => Err(AnalysisError::Unsupported(format!(
            "sojourn time needs convex cells; got {} tiers",
            tiers.len()
        ))),
    }
}
