//! Mobility-aware coverage and throughput.

use serde::{Deserialize, Serialize};

use super::{require, AnalysisError};

/// Small-scale fading model. Only unit-mean Rayleigh is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    #[default]
    Rayleigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    /// SIR threshold per tier (linear).
    pub tau: Vec<f64>,
    /// Probability that a handoff fails and the connection drops.
    pub beta: f64,
    #[serde(default)]
    pub fading: Fading,
}

impl CoverageSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        require(!self.tau.is_empty(), || "tau needs one threshold per tier".into())?;
        for (k, t) in self.tau.iter().enumerate() {
            require(*t > 0.0 && t.is_finite(), || format!("tau[{k}] = {t}"))?;
        }
        require((0.0..=1.0).contains(&self.beta), || format!("beta = {}", self.beta))
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self {
            beta,
            ..self.clone()
        }
    }
}

/// Joint probabilities of initial association, handoff outcome and coverage
/// at the end of one movement period. Indices are `[k]` for the initial
/// tier and `[k][j]` for a handoff from tier `k` to tier `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCoverageTable {
    /// `P(n = k)`.
    pub association: Vec<f64>,
    /// `P(n = k, H̄_k)`.
    pub no_handoff: Vec<f64>,
    /// `P(n = k, H_{k,j})`.
    pub handoff: Vec<Vec<f64>>,
    /// `P(γ_k ≥ τ_k, n = k, H̄_k)`.
    pub covered_no_handoff: Vec<f64>,
    /// `P(γ_j ≥ τ_j, n = k, H_{k,j})`.
    pub covered_handoff: Vec<Vec<f64>>,
}

impl JointCoverageTable {
    pub fn tiers(&self) -> usize {
        self.association.len()
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let n = self.tiers();
        require(n > 0, || "empty joint table".into())?;
        require(
            self.no_handoff.len() == n
                && self.covered_no_handoff.len() == n
                && self.handoff.len() == n
                && self.covered_handoff.len() == n
                && self.handoff.iter().chain(&self.covered_handoff).all(|r| r.len() == n),
            || format!("joint table is not {n}×{n}"),
        )?;
        let tol = 1e-9;
        let all = self
            .association
            .iter()
            .chain(&self.no_handoff)
            .chain(&self.covered_no_handoff)
            .chain(self.handoff.iter().flatten())
            .chain(self.covered_handoff.iter().flatten());
        for p in all {
            require((0.0..=1.0 + tol).contains(p), || format!("probability {p} outside [0, 1]"))?;
        }
        for k in 0..n {
            let row = self.no_handoff[k] + self.handoff[k].iter().sum::<f64>();
            require(row <= self.association[k] + tol, || {
                format!("row {k} sums to {row} > P(n = {k}) = {}", self.association[k])
            })?;
            require(self.covered_no_handoff[k] <= self.no_handoff[k] + tol, || {
                format!("covered no-handoff mass of tier {k} exceeds its no-handoff mass")
            })?;
            for j in 0..n {
                require(self.covered_handoff[k][j] <= self.handoff[k][j] + tol, || {
                    format!("covered handoff mass ({k}, {j}) exceeds its handoff mass")
                })?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub per_tier: Vec<f64>,
    pub overall: f64,
    pub beta: f64,
}

/// `C_k = (1−β)·Σ_j P(γ_j ≥ τ_j, n=k, H_{k,j}) + P(γ_k ≥ τ_k, n=k, H̄_k)`.
///
/// Handoff targets are unique per movement, so the `H_{k,j}` events are
/// disjoint in `j` and the masses add.
pub fn mobility_aware_coverage(spec: &CoverageSpec, joint: &JointCoverageTable) -> Result<CoverageResult, AnalysisError> {
    spec.validate()?;
    joint.validate()?;
    require(spec.tau.len() == joint.tiers(), || {
        format!("{} thresholds for {} tiers", spec.tau.len(), joint.tiers())
    })?;
    let per_tier: Vec<f64> = (0..joint.tiers())
        .map(|k| (1.0 - spec.beta) * joint.covered_handoff[k].iter().sum::<f64>() + joint.covered_no_handoff[k])
        .collect();
    Ok(CoverageResult {
        overall: per_tier.iter().sum(),
        per_tier,
        beta: spec.beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub value: f64,
    /// `H·d ≥ 1`: every second is spent in handoff delay.
    pub saturated: bool,
}

/// `avg·(1 − H·d)`, clamped at zero.
pub fn mobility_aware_throughput(avg_throughput: f64, rate: f64, delay: f64) -> Result<Throughput, AnalysisError> {
    for (name, x) in [("avg_throughput", avg_throughput), ("rate", rate), ("delay", delay)] {
        require(x >= 0.0 && x.is_finite(), || format!("{name} = {x}"))?;
    }
    let factor = 1.0 - rate * delay;
    Ok(if factor <= 0.0 {
        Throughput {
            value: 0.0,
            saturated: true,
        }
    } else {
        Throughput {
            value: avg_throughput * factor,
            saturated: false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> JointCoverageTable {
        JointCoverageTable {
            association: vec![0.3, 0.7],
            no_handoff: vec![0.2, 0.5],
            handoff: vec![vec![0.05, 0.05], vec![0.1, 0.1]],
            covered_no_handoff: vec![0.15, 0.3],
            covered_handoff: vec![vec![0.02, 0.03], vec![0.04, 0.06]],
        }
    }

    fn spec(beta: f64) -> CoverageSpec {
        CoverageSpec {
            tau: vec![1.0, 1.0],
            beta,
            fading: Fading::Rayleigh,
        }
    }

    #[test]
    fn beta_extremes() {
        let c0 = mobility_aware_coverage(&spec(0.0), &table()).unwrap();
        assert!((c0.overall - (0.15 + 0.3 + 0.02 + 0.03 + 0.04 + 0.06)).abs() < 1e-15);
        let c1 = mobility_aware_coverage(&spec(1.0), &table()).unwrap();
        assert_eq!(c1.per_tier, vec![0.15, 0.3]);
    }

    #[test]
    fn affine_in_beta() {
        let cs: Vec<f64> = (0..5)
            .map(|i| mobility_aware_coverage(&spec(i as f64 / 4.0), &table()).unwrap().overall)
            .collect();
        for w in cs.windows(3) {
            assert!(((w[0] - w[1]) - (w[1] - w[2])).abs() < 1e-15);
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let mut t = table();
        t.no_handoff[0] = 0.29;
        assert!(mobility_aware_coverage(&spec(0.5), &t).is_err());
        let mut t = table();
        t.covered_handoff[1][1] = 0.2;
        assert!(mobility_aware_coverage(&spec(0.5), &t).is_err());
        assert!(mobility_aware_coverage(&spec(1.5), &table()).is_err());
    }

    #[test]
    fn throughput() {
        assert_eq!(mobility_aware_throughput(100.0, 0.25, 0.0).unwrap().value, 100.0);
        assert_eq!(mobility_aware_throughput(100.0, 0.25, 1.0).unwrap().value, 75.0);
        let t = mobility_aware_throughput(100.0, 2.0, 1.0).unwrap();
        assert!(t.saturated && t.value == 0.0);
        assert!(mobility_aware_throughput(-1.0, 0.1, 0.1).is_err());
    }
}
