use serde::{Deserialize, Serialize};

use super::{BsId, Deployment, GeometryError, Point, Tier};

/// Rule mapping a user location to its serving BS. Exact ties resolve to the
/// lowest `(tier, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AssociationPolicy {
    #[default]
    NearestBs,
    /// Maximize `P_k·B_k·‖u − x‖^(−α_k)`.
    MaxBiasedPower,
}

/// Serving BS of location `u`.
pub fn serving_bs(u: Point, dep: &Deployment, policy: AssociationPolicy) -> Result<BsId, GeometryError> {
    let mut best: Option<(BsId, f64)> = None;
    for (k, tier) in dep.tiers().iter().enumerate() {
        let Some((index, d2)) = dep.nearest_in_tier(k, u) else {
            continue;
        };
        // Lower score wins.
        let score = match policy {
            AssociationPolicy::NearestBs => d2,
            AssociationPolicy::MaxBiasedPower => biased_score(tier, d2),
        };
        let id = BsId { tier: k, index };
        best = match best {
            Some((bid, bs)) if bs <= score => Some((bid, bs)),
            _ => Some((id, score)),
        };
    }
    best.map(|(id, _)| id).ok_or(GeometryError::EmptyDeployment)
}

/// Negative log of biased received power: `α/2·ln d² − ln(P·B)`.
fn biased_score(tier: &Tier, d2: f64) -> f64 {
    let w = tier.weight();
    if w <= 0.0 {
        return f64::INFINITY;
    }
    if d2 <= 0.0 {
        return f64::NEG_INFINITY;
    }
    0.5 * tier.pathloss_exponent * d2.ln() - w.ln()
}

/// `A_k = λ_k / Σ_j λ_j (P_jB_j / P_kB_k)^{2/α}`, valid only when every tier
/// shares one path-loss exponent; `None` otherwise.
pub fn association_probability_closed_form(tiers: &[Tier]) -> Option<Vec<f64>> {
    let alpha = tiers.first()?.pathloss_exponent;
    if tiers.iter().any(|t| t.pathloss_exponent != alpha) {
        return None;
    }
    Some(
        tiers
            .iter()
            .map(|tk| {
                let denom: f64 = tiers
                    .iter()
                    .map(|tj| tj.density * (tj.weight() / tk.weight()).powf(2.0 / alpha))
                    .sum();
                tk.density / denom
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lattice, LatticeKind, Layout, Region};

    fn two_bs() -> Deployment {
        Deployment::from_parts(
            vec![Tier::with_density(0.01)],
            vec![vec![[0.0, 0.0], [10.0, 0.0]]],
            Layout::Ppp,
            Region::square(20.0),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn nearest_single_tier() {
        let dep = two_bs();
        let id = serving_bs([4.0, 0.0], &dep, AssociationPolicy::NearestBs).unwrap();
        assert_eq!(id, BsId { tier: 0, index: 0 });
        // Exact tie at the bisector goes to the lower index.
        let id = serving_bs([5.0, 3.0], &dep, AssociationPolicy::NearestBs).unwrap();
        assert_eq!(id.index, 0);
    }

    #[test]
    fn biased_power_two_tiers() {
        // P2B2/(P1B1) = 4/5, α = 4; tier-1 BS at 10 m, tier-2 BS at 9 m.
        let dep = Deployment::from_parts(
            vec![Tier::new(0.0004, 1.0, 1.0, 4.0), Tier::new(0.001, 0.2, 4.0, 4.0)],
            vec![vec![[10.0, 0.0]], vec![[-9.0, 0.0]]],
            Layout::Ppp,
            Region::square(30.0),
            0.0,
        )
        .unwrap();
        assert!(0.8 * 1e4 > 9f64.powi(4));
        let id = serving_bs([0.0, 0.0], &dep, AssociationPolicy::MaxBiasedPower).unwrap();
        assert_eq!(id.tier, 1);
        let id = serving_bs([0.0, 0.0], &dep, AssociationPolicy::NearestBs).unwrap();
        assert_eq!(id.tier, 1);
        // Move the tier-2 BS to 9.5 m: (4/5)·10⁴ = 8000 < 9.5⁴ ≈ 8145, tier 1 wins.
        let dep = Deployment::from_parts(
            dep.tiers().to_vec(),
            vec![vec![[10.0, 0.0]], vec![[-9.5, 0.0]]],
            Layout::Ppp,
            Region::square(30.0),
            0.0,
        )
        .unwrap();
        let id = serving_bs([0.0, 0.0], &dep, AssociationPolicy::MaxBiasedPower).unwrap();
        assert_eq!(id.tier, 0);
    }

    #[test]
    fn lattice_nearest() {
        let dep = build_lattice(LatticeKind::Square, 50.0, Region::square(500.0), [0.0, 0.0]).unwrap();
        let id = serving_bs([30.0, 0.0], &dep, AssociationPolicy::NearestBs).unwrap();
        let p = dep.position(id);
        assert!((p[0] - 50.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn policies_agree_for_uniform_single_tier() {
        let dep = build_lattice(LatticeKind::Hex, 20.0, Region::square(300.0), [1.0, 2.0]).unwrap();
        for i in 0..200 {
            let u = [(i as f64 * 7.31) % 250.0 - 125.0, (i as f64 * 3.17) % 250.0 - 125.0];
            assert_eq!(
                serving_bs(u, &dep, AssociationPolicy::NearestBs).unwrap(),
                serving_bs(u, &dep, AssociationPolicy::MaxBiasedPower).unwrap()
            );
        }
    }

    #[test]
    fn fig_setup_association_probability() {
        let tiers = [Tier::new(0.0004, 1.0, 1.0, 4.0), Tier::new(0.001, 0.2, 4.0, 4.0)];
        let a = association_probability_closed_form(&tiers).unwrap();
        assert!((a[0] - 0.309017).abs() < 1e-5, "{a:?}");
        assert!((a[0] + a[1] - 1.0).abs() < 1e-12);
        let mixed = [Tier::new(0.0004, 1.0, 1.0, 4.0), Tier::new(0.001, 1.0, 1.0, 3.0)];
        assert!(association_probability_closed_form(&mixed).is_none());
    }
}
