//! Handoff probability in a K-tier PPP under maximum biased received power
//! association.
//!
//! A user served by tier `k` at distance `r` sees no tier-`j` BS inside the
//! equivalent radius `r′_j(r)`, the distance at which a tier-`j` BS would
//! deliver the same biased power. After moving `v` the serving BS sits at
//! `R` and a handoff to tier `j` happens iff a tier-`j` BS lies in
//! `b(u₁, R′_j) \ b(u₀, r′_j)`.
//!
//! The serving distance density follows from the same thinning argument:
//! `P(n = k, r ∈ dr) = 2πλ_k r·exp(−π Σ_j λ_j r′_j(r)²) dr`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::handoff::{disk_difference_area, displaced_distance, handoff_prob, lens_area, theta_breakpoints};
use super::quadrature::{integrate, integrate_2d, QuadResult, QuadratureSpec};
use super::{require, AnalysisError};
use crate::geometry::Tier;

/// Distance map from a tier-`k` serving distance to the tier-`j` distance of
/// equal biased power: `r′ = (w_j/w_k)^{1/α_j}·r^{α_k/α_j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentTierMap {
    coef: f64,
    exponent: f64,
}

impl EquivalentTierMap {
    pub fn new(tiers: &[Tier], k: usize, j: usize) -> Self {
        let (tk, tj) = (&tiers[k], &tiers[j]);
        if k == j {
            return Self {
                coef: 1.0,
                exponent: 1.0,
            };
        }
        Self {
            coef: (tj.weight() / tk.weight()).powf(1.0 / tj.pathloss_exponent),
            exponent: tk.pathloss_exponent / tj.pathloss_exponent,
        }
    }

    pub fn apply(&self, r: f64) -> f64 {
        if self.exponent == 1.0 {
            self.coef * r
        } else {
            self.coef * r.powf(self.exponent)
        }
    }
}

/// How per-pair no-handoff probabilities combine into `P(H_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiTierMethod {
    /// `P(H_k) = 1 − E[∏_j e^{−λ_j D_j}]`: the tiers are independent given
    /// the serving distance and direction, so the product is taken inside
    /// the expectation.
    #[default]
    Joint,
    /// `P(H_k) = 1 − ∏_j P(H̄_{k,j})` with each factor deconditioned on its
    /// own. Ignores the correlation through the shared `(r, θ)`.
    ProductOfPairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTierHandoff {
    /// `A_k`.
    pub association: Vec<f64>,
    /// `P(H_k)`: handoff probability of a user initially served by tier `k`.
    pub per_tier: Vec<f64>,
    /// `H₀ = Σ_k A_k·P(H_k)`.
    pub total: f64,
    pub error_estimate: f64,
    pub method: MultiTierMethod,
}

fn validate_tiers(tiers: &[Tier]) -> Result<(), AnalysisError> {
    require(!tiers.is_empty(), || "at least one tier is required".into())?;
    for t in tiers {
        t.validate()
            .map_err(|e| AnalysisError::InvalidInput(e.to_string()))?;
        require(t.weight() > 0.0, || format!("tier weight P·B must be positive, got {}", t.weight()))?;
    }
    Ok(())
}

fn maps_for(tiers: &[Tier], k: usize) -> Vec<EquivalentTierMap> {
    (0..tiers.len()).map(|j| EquivalentTierMap::new(tiers, k, j)).collect()
}

/// `Σ_j λ_j r′_j(r)²`.
fn void_exponent(tiers: &[Tier], maps: &[EquivalentTierMap], r: f64) -> f64 {
    tiers
        .iter()
        .zip(maps)
        .map(|(t, m)| {
            let x = m.apply(r);
            t.density * x * x
        })
        .sum()
}

/// Joint density of serving tier `k` and serving distance `r`.
fn joint_serving_density(tiers: &[Tier], maps: &[EquivalentTierMap], k: usize, r: f64) -> f64 {
    2.0 * PI * tiers[k].density * r * (-PI * void_exponent(tiers, maps, r)).exp()
}

/// Radius beyond which the tier-`k` serving mass is negligible, plus a
/// breakpoint at the bulk of the mass.
fn radial_range(tiers: &[Tier], maps: &[EquivalentTierMap], k: usize, quad: &QuadratureSpec) -> (f64, f64) {
    let hard = quad.radial_cutoff(tiers[k].density);
    let f2 = quad.r_max_factor * quad.r_max_factor;
    let (mut lo, mut hi) = (0.0, hard);
    if void_exponent(tiers, maps, hi) <= f2 {
        return (hard, 0.5 * hard);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if void_exponent(tiers, maps, mid) < f2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi, hi / quad.r_max_factor)
}

/// `A_k` for every tier, by integrating the joint serving density.
pub fn association_probabilities(tiers: &[Tier], quad: &QuadratureSpec) -> Result<Vec<f64>, AnalysisError> {
    validate_tiers(tiers)?;
    quad.validate()?;
    (0..tiers.len())
        .map(|k| {
            let maps = maps_for(tiers, k);
            let (r_max, bulk) = radial_range(tiers, &maps, k, quad);
            integrate(|r| joint_serving_density(tiers, &maps, k, r), 0.0, r_max, &[bulk], quad)
                .map(|q| q.value)
        })
        .collect()
}

/// `f(r | n = k)`: serving-distance density of a user associated with tier
/// `k`, given the association probability `a_k` of that tier.
pub fn serving_distance_pdf(tiers: &[Tier], k: usize, r: f64, a_k: f64) -> f64 {
    if r < 0.0 || a_k <= 0.0 {
        return 0.0;
    }
    joint_serving_density(tiers, &maps_for(tiers, k), k, r) / a_k
}

/// Area of the region in which a tier-`j` BS triggers a handoff away from the
/// tier-`k` serving BS.
fn handoff_area(maps: &[EquivalentTierMap], k: usize, j: usize, r: f64, v: f64, theta: f64) -> f64 {
    if j == k {
        return lens_area(r, v, theta);
    }
    let big_r = displaced_distance(r, v, theta);
    disk_difference_area(maps[j].apply(r), maps[j].apply(big_r), v)
}

/// `∫∫ f(r, n=k)·g(r, θ) dθ/π dr` over the tier-`k` serving region.
fn serving_average<G: FnMut(f64, f64) -> f64>(
    tiers: &[Tier],
    maps: &[EquivalentTierMap],
    k: usize,
    v: f64,
    mut g: G,
    quad: &QuadratureSpec,
) -> Result<QuadResult, AnalysisError> {
    let (r_max, bulk) = radial_range(tiers, maps, k, quad);
    let mut q = integrate_2d(
        0.0,
        r_max,
        &[v, bulk],
        |r| (0.0, PI, theta_breakpoints(r, v)),
        |r, theta| joint_serving_density(tiers, maps, k, r) / PI * g(r, theta),
        quad,
    )?;
    q.error += quad.radial_tail_bound();
    Ok(q)
}

/// `P(H̄_{k,j})`: probability that a user served by tier `k` does not hand
/// off to tier `j` after moving `v`.
pub fn multi_tier_no_handoff_prob(
    k: usize,
    j: usize,
    v: f64,
    tiers: &[Tier],
    quad: &QuadratureSpec,
) -> Result<QuadResult, AnalysisError> {
    validate_tiers(tiers)?;
    quad.validate()?;
    require(k < tiers.len() && j < tiers.len(), || format!("tier pair ({k}, {j}) out of range"))?;
    require(v >= 0.0 && v.is_finite(), || format!("v = {v}"))?;
    if v == 0.0 {
        return Ok(QuadResult {
            value: 1.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let a = association_probabilities(tiers, quad)?;
    let maps = maps_for(tiers, k);
    let lj = tiers[j].density;
    let q = serving_average(
        tiers,
        &maps,
        k,
        v,
        |r, theta| -(-lj * handoff_area(&maps, k, j, r, v, theta)).exp_m1(),
        quad,
    )?;
    Ok(QuadResult {
        value: (1.0 - q.value / a[k]).clamp(0.0, 1.0),
        error: q.error / a[k],
        evaluations: q.evaluations,
    })
}

/// Per-tier and total handoff probability with the default (joint) combination.
pub fn multi_tier_handoff_prob(v: f64, tiers: &[Tier], quad: &QuadratureSpec) -> Result<MultiTierHandoff, AnalysisError> {
    multi_tier_handoff_prob_with(v, tiers, quad, MultiTierMethod::default())
}

pub fn multi_tier_handoff_prob_with(
    v: f64,
    tiers: &[Tier],
    quad: &QuadratureSpec,
    method: MultiTierMethod,
) -> Result<MultiTierHandoff, AnalysisError> {
    validate_tiers(tiers)?;
    quad.validate()?;
    require(v >= 0.0 && v.is_finite(), || format!("v = {v}"))?;
    let n = tiers.len();
    if n == 1 {
        let q = handoff_prob(v, tiers[0].density, quad)?;
        return Ok(MultiTierHandoff {
            association: vec![1.0],
            per_tier: vec![q.value],
            total: q.value,
            error_estimate: q.error,
            method,
        });
    }
    let association = association_probabilities(tiers, quad)?;
    if v == 0.0 {
        return Ok(MultiTierHandoff {
            association,
            per_tier: vec![0.0; n],
            total: 0.0,
            error_estimate: 0.0,
            method,
        });
    }
    let mut per_tier = Vec::with_capacity(n);
    let mut error = 0.0;
    for k in 0..n {
        let p = match method {
            MultiTierMethod::Joint => {
                let maps = maps_for(tiers, k);
                let q = serving_average(
                    tiers,
                    &maps,
                    k,
                    v,
                    |r, theta| {
                        let exponent: f64 = (0..n)
                            .map(|j| tiers[j].density * handoff_area(&maps, k, j, r, v, theta))
                            .sum();
                        -(-exponent).exp_m1()
                    },
                    quad,
                )?;
                error += q.error;
                q.value / association[k]
            }
            MultiTierMethod::ProductOfPairs => {
                let mut stay = 1.0;
                for j in 0..n {
                    let q = multi_tier_no_handoff_prob(k, j, v, tiers, quad)?;
                    error += association[k] * q.error;
                    stay *= q.value;
                }
                1.0 - stay
            }
        };
        per_tier.push(p.clamp(0.0, 1.0));
    }
    let total = association.iter().zip(&per_tier).map(|(a, p)| a * p).sum();
    Ok(MultiTierHandoff {
        association,
        per_tier,
        total,
        error_estimate: error,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::association_probability_closed_form;

    fn fig_tiers() -> Vec<Tier> {
        vec![Tier::new(0.0004, 1.0, 1.0, 4.0), Tier::new(0.001, 0.2, 4.0, 4.0)]
    }

    #[test]
    fn equivalent_map_identity_and_monotone() {
        let t = fig_tiers();
        let id = EquivalentTierMap::new(&t, 1, 1);
        assert_eq!(id.apply(3.7), 3.7);
        let m = EquivalentTierMap::new(&t, 0, 1);
        assert!((m.apply(10.0) - 0.8f64.powf(0.25) * 10.0).abs() < 1e-12);
        let mixed = vec![Tier::new(0.0004, 1.0, 1.0, 4.0), Tier::new(0.001, 0.5, 1.0, 3.0)];
        let m = EquivalentTierMap::new(&mixed, 0, 1);
        let mut prev = 0.0;
        for i in 1..100 {
            let x = m.apply(i as f64);
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn association_matches_closed_form() {
        let t = fig_tiers();
        let q = QuadratureSpec::default();
        let a = association_probabilities(&t, &q).unwrap();
        let c = association_probability_closed_form(&t).unwrap();
        for (x, y) in a.iter().zip(&c) {
            assert!((x - y).abs() < 1e-8, "{a:?} vs {c:?}");
        }
    }

    #[test]
    fn serving_pdf_normalized() {
        let t = fig_tiers();
        let q = QuadratureSpec::default();
        let a = association_probabilities(&t, &q).unwrap();
        for k in 0..2 {
            let total = integrate(|r| serving_distance_pdf(&t, k, r, a[k]), 0.0, 400.0, &[], &q).unwrap();
            assert!((total.value - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn single_tier_delegates() {
        let q = QuadratureSpec::default();
        let t = vec![Tier::with_density(0.0004)];
        let m = multi_tier_handoff_prob(10.0, &t, &q).unwrap();
        let s = handoff_prob(10.0, 0.0004, &q).unwrap();
        assert_eq!(m.total, s.value);
    }

    #[test]
    fn identical_tiers_equal_superposition() {
        let q = QuadratureSpec::default();
        let t = vec![Tier::with_density(0.0004), Tier::with_density(0.0006)];
        let m = multi_tier_handoff_prob(10.0, &t, &q).unwrap();
        let s = handoff_prob(10.0, 0.001, &q).unwrap();
        assert!((m.total - s.value).abs() < 1e-7, "{} vs {}", m.total, s.value);
    }

    #[test]
    fn zero_velocity() {
        let q = QuadratureSpec::default();
        let m = multi_tier_handoff_prob(0.0, &fig_tiers(), &q).unwrap();
        assert_eq!(m.total, 0.0);
        for (k, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(multi_tier_no_handoff_prob(k, j, 0.0, &fig_tiers(), &q).unwrap().value, 1.0);
        }
    }

    #[test]
    fn product_form_overstates_handoffs() {
        let q = QuadratureSpec::default();
        let j = multi_tier_handoff_prob_with(10.0, &fig_tiers(), &q, MultiTierMethod::Joint).unwrap();
        let p = multi_tier_handoff_prob_with(10.0, &fig_tiers(), &q, MultiTierMethod::ProductOfPairs).unwrap();
        assert!(p.total >= j.total - 1e-9, "{} {}", p.total, j.total);
    }
}
