//! Monte Carlo engine: mobile users driven through realized deployments.
//!
//! Every replication is a pure function of its seed (`base_seed + r`), and
//! results are folded in replication order, so estimates are bit-identical
//! for any worker count.

mod detect;
mod estimators;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::geometry::{
    build_lattice, default_guard_band, mean_cell_radius, random_lattice_offset, Deployment, GeometryError,
    LatticeKind, Region, Tier, GUARD_RADII,
};
use crate::mobility::MobilityError;

pub use detect::{detect_handoffs, detect_in_segments, probe_limit, write_events_csv, HandoffEvent, HandoffKind};
pub use estimators::{
    estimate_conditional_handoff_prob, estimate_crossing_prob, estimate_handoff_prob, estimate_handoff_rate,
    estimate_joint_coverage_handoff, estimate_sojourn, JointCoverageEstimate, COVERAGE_GUARD_RADII,
};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("probe step {dt_probe} s is coarser than the limit {limit} s")]
    ProbeTooCoarse { dt_probe: f64, limit: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no elapsed time to normalize by")]
    ZeroElapsed,
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How many independent replications to run and how to seed them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationPlan {
    pub n_replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker threads; 0 uses the global pool.
    #[serde(default)]
    pub parallel_width: usize,
}

impl ReplicationPlan {
    pub fn new(n_replications: usize, base_seed: u64) -> Self {
        Self {
            n_replications,
            base_seed,
            parallel_width: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.n_replications == 0 {
            return Err(SimulationError::InvalidInput("n_replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed_for(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    /// Runs `f(seed)` for every replication; results come back in
    /// replication order regardless of scheduling.
    pub fn run<T, F>(&self, f: F) -> Result<Vec<T>, SimulationError>
    where
        T: Send,
        F: Fn(u64) -> Result<T, SimulationError> + Sync + Send,
    {
        self.validate()?;
        let job = || {
            (0..self.n_replications)
                .into_par_iter()
                .map(|r| f(self.seed_for(r)))
                .collect::<Result<Vec<T>, _>>()
        };
        if self.parallel_width == 0 {
            job()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.parallel_width)
                .build()
                .map_err(|e| SimulationError::Pool(e.to_string()))?
                .install(job)
        }
    }
}

/// Point estimate with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n: usize,
}

impl Estimate {
    pub fn new(mean: f64, std_error: f64, n: usize) -> Self {
        Self {
            mean,
            std_error,
            ci95_low: mean - 1.96 * std_error,
            ci95_high: mean + 1.96 * std_error,
            n,
        }
    }

    /// Sample mean and its standard error. A single sample reports zero error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let (m, se) = crate::stats::mean_and_se(xs);
        Self::new(m, se, xs.len())
    }

    pub fn proportion(successes: usize, n: usize) -> Self {
        let p = successes as f64 / n as f64;
        Self::new(p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }

    /// Ratio estimator `Σx / Σt` with the delta-method standard error.
    pub fn ratio(num: &[f64], den: &[f64]) -> Result<Self, SimulationError> {
        let n = num.len();
        let (sx, st): (f64, f64) = (num.iter().sum(), den.iter().sum());
        if st <= 0.0 || n == 0 {
            return Err(SimulationError::ZeroElapsed);
        }
        let r = sx / st;
        if n < 2 {
            return Ok(Self::new(r, 0.0, n));
        }
        let mt = st / n as f64;
        let ss: f64 = num.iter().zip(den).map(|(x, t)| (x - r * t).powi(2)).sum();
        let se = (ss / (n as f64 * (n as f64 - 1.0))).sqrt() / mt;
        Ok(Self::new(r, se, n))
    }

    pub fn covers(&self, x: f64) -> bool {
        self.ci95_low <= x && x <= self.ci95_high
    }

    /// `|mean − x|` in standard errors (infinite when the error is zero and
    /// the values differ).
    pub fn z_score(&self, x: f64) -> f64 {
        let d = (self.mean - x).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Deployment recipe, realized afresh for every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeploymentSpec {
    /// Independent PPP per tier.
    Ppp { tiers: Vec<Tier> },
    /// Square lattice of the given density, uniformly random offset.
    SquareLattice { density: f64 },
    /// Hexagonal lattice of the given density, uniformly random offset.
    HexLattice { density: f64 },
}

impl DeploymentSpec {
    pub fn single_tier_ppp(density: f64) -> Self {
        DeploymentSpec::Ppp {
            tiers: vec![Tier::with_density(density)],
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        match self {
            DeploymentSpec::Ppp { tiers } => {
                if tiers.is_empty() {
                    return Err(SimulationError::InvalidInput("ppp deployment needs at least one tier".into()));
                }
                for t in tiers {
                    t.validate()?;
                }
            }
            DeploymentSpec::SquareLattice { density } | DeploymentSpec::HexLattice { density } => {
                if !(*density > 0.0) || !density.is_finite() {
                    return Err(GeometryError::InvalidDensity(*density).into());
                }
            }
        }
        Ok(())
    }

    pub fn tiers(&self) -> Vec<Tier> {
        match self {
            DeploymentSpec::Ppp { tiers } => tiers.clone(),
            DeploymentSpec::SquareLattice { density } | DeploymentSpec::HexLattice { density } => {
                vec![Tier::with_density(*density)]
            }
        }
    }

    pub fn total_density(&self) -> f64 {
        self.tiers().iter().map(|t| t.density).sum()
    }

    fn lattice(&self) -> Option<(LatticeKind, f64)> {
        match *self {
            DeploymentSpec::Ppp { .. } => None,
            DeploymentSpec::SquareLattice { density } => Some((LatticeKind::Square, density)),
            DeploymentSpec::HexLattice { density } => Some((LatticeKind::Hex, density)),
        }
    }

    /// Default guard band around a window: a few mean cell radii of the
    /// sparsest tier.
    pub fn default_guard(&self) -> f64 {
        default_guard_band(&self.tiers())
    }

    /// Realizes the deployment over the origin-centred rectangle with
    /// half-widths `half` plus at least `guard` on every side.
    pub fn realize<R: Rng + ?Sized>(&self, half: [f64; 2], guard: f64, rng: &mut R) -> Result<Deployment, SimulationError> {
        self.validate()?;
        match self.lattice() {
            None => {
                let region = Region::Rectangle {
                    width: 2.0 * half[0].max(1.0),
                    height: 2.0 * half[1].max(1.0),
                };
                Ok(Deployment::poisson_with_guard(self.tiers(), region, guard, rng)?)
            }
            Some((kind, density)) => {
                let d = kind.spacing_for_density(density);
                // build_lattice adds its own guard; widen the window for the rest.
                let extra = (guard - GUARD_RADII * mean_cell_radius(density)).max(0.0);
                let min_half = 2.0 * d;
                let region = Region::Rectangle {
                    width: 2.0 * (half[0] + extra).max(min_half),
                    height: 2.0 * (half[1] + extra).max(min_half),
                };
                let offset = random_lattice_offset(kind, d, rng);
                Ok(build_lattice(kind, d, region, offset)?)
            }
        }
    }
}
