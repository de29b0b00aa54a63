use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::detect::{detect_in_segments, probe_limit};
use super::{DeploymentSpec, Estimate, ReplicationPlan, SimulationError};
use crate::analysis::{CoverageSpec, JointCoverageTable};
use crate::geometry::{mean_cell_radius, serving_bs, AssociationPolicy, BsId, Deployment, Layout, Point, Tier};
use crate::mobility::{generate_for_duration, ModelConfig, Segment};
use crate::rng::rng_from_seed;

/// Interference is collected from this many mean cell radii (of the
/// sparsest tier) around the window; the neglected far-field interference
/// shifts coverage by well under 1%.
pub const COVERAGE_GUARD_RADII: f64 = 20.0;

fn check_speed(v: f64) -> Result<(), SimulationError> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(SimulationError::InvalidInput(format!("v must be non-negative, got {v}")));
    }
    Ok(())
}

/// Half-widths of the origin-centred box holding every segment.
fn half_extents(segs: &[Segment]) -> [f64; 2] {
    segs.iter().flat_map(|s| [s.start, s.end()]).fold([0.0f64, 0.0f64], |h, p| {
        [h[0].max(p[0].abs()), h[1].max(p[1].abs())]
    })
}

fn straight(theta: f64, v: f64, duration: f64) -> Segment {
    Segment {
        start: [0.0, 0.0],
        theta,
        length: v * duration,
        speed: v,
        flight_time: duration,
        pause: 0.0,
        wrapped: false,
    }
}

fn serve(p: Point, dep: &Deployment, policy: AssociationPolicy) -> Result<BsId, SimulationError> {
    Ok(serving_bs(p, dep, policy)?)
}

/// Handoffs per unit time (flight plus pause) over `horizon` seconds of
/// trajectory per replication, with a fresh deployment each time.
pub fn estimate_handoff_rate(
    model: &ModelConfig,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    plan: &ReplicationPlan,
    horizon: f64,
) -> Result<Estimate, SimulationError> {
    model.validate()?;
    dep.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(SimulationError::ZeroElapsed);
    }
    let counts = plan.run(|seed| {
        let mut rng = rng_from_seed(seed);
        let segs = generate_for_duration(model, horizon, [0.0, 0.0], &mut rng)?;
        let d = dep.realize(half_extents(&segs), dep.default_guard(), &mut rng)?;
        let v_max = segs.iter().map(|s| s.speed).fold(0.0, f64::max);
        let events = if v_max > 0.0 {
            detect_in_segments(&segs, &d, policy, probe_limit(&d, v_max), usize::MAX)?
        } else {
            Vec::new()
        };
        Ok(events.iter().filter(|e| e.time < horizon).count() as f64)
    })?;
    Estimate::ratio(&counts, &vec![horizon; counts.len()])
}

struct Movement {
    start: BsId,
    end: BsId,
    crossings: usize,
}

/// One movement of length `v` in a uniform direction from the origin.
fn one_movement(
    v: f64,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    seed: u64,
    count_crossings: bool,
) -> Result<Movement, SimulationError> {
    let mut rng = rng_from_seed(seed);
    let theta = 2.0 * PI * rng.random::<f64>();
    let d = dep.realize([v + 1.0, v + 1.0], dep.default_guard(), &mut rng)?;
    let seg = straight(theta, v, 1.0);
    let start = serve(seg.start, &d, policy)?;
    let end = serve(seg.end(), &d, policy)?;
    let crossings = if count_crossings && v > 0.0 {
        detect_in_segments(&[seg], &d, policy, probe_limit(&d, v), usize::MAX)?.len()
    } else {
        0
    };
    Ok(Movement { start, end, crossings })
}

/// Share of unit-time movements whose end-of-period serving BS differs from
/// the initial one.
pub fn estimate_handoff_prob(
    v: f64,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    plan: &ReplicationPlan,
) -> Result<Estimate, SimulationError> {
    check_speed(v)?;
    dep.validate()?;
    let flags = plan.run(|seed| {
        let m = one_movement(v, dep, policy, seed, false)?;
        Ok(m.start != m.end)
    })?;
    Ok(Estimate::proportion(flags.iter().filter(|c| **c).count(), flags.len()))
}

/// Share of unit-time movements with at least one detected boundary
/// crossing (as opposed to a net change of serving BS).
pub fn estimate_crossing_prob(
    v: f64,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    plan: &ReplicationPlan,
) -> Result<Estimate, SimulationError> {
    check_speed(v)?;
    dep.validate()?;
    let flags = plan.run(|seed| Ok(one_movement(v, dep, policy, seed, true)?.crossings > 0))?;
    Ok(Estimate::proportion(flags.iter().filter(|c| **c).count(), flags.len()))
}

/// Handoff probability given the serving BS at distance `r` and a movement
/// of length `v` at angle `theta` from the direction pointing away from it.
///
/// The rest of the network is a PPP of intensity `lambda` outside
/// `b(0, r)`, which is the exact conditional law.
pub fn estimate_conditional_handoff_prob(
    r: f64,
    theta: f64,
    v: f64,
    lambda: f64,
    plan: &ReplicationPlan,
) -> Result<Estimate, SimulationError> {
    check_speed(v)?;
    if !(r >= 0.0) || !r.is_finite() || !theta.is_finite() {
        return Err(SimulationError::InvalidInput(format!("r = {r}, theta = {theta}")));
    }
    let spec = DeploymentSpec::single_tier_ppp(lambda);
    spec.validate()?;
    let flags = plan.run(|seed| {
        let mut rng = rng_from_seed(seed);
        let half = v + r + 1.0;
        let raw = spec.realize([half, half], spec.default_guard(), &mut rng)?;
        // Serving BS on the negative x-axis, so θ = 0 moves along +x.
        let mut pts: Vec<Point> = vec![[-r, 0.0]];
        pts.extend(raw.points(0).iter().filter(|p| p[0].hypot(p[1]) > r));
        let d = Deployment::from_parts(raw.tiers().to_vec(), vec![pts], Layout::Ppp, raw.region(), raw.guard_band())?;
        let end = serve([v * theta.cos(), v * theta.sin()], &d, AssociationPolicy::NearestBs)?;
        Ok(end.index != 0)
    })?;
    Ok(Estimate::proportion(flags.iter().filter(|c| **c).count(), flags.len()))
}

/// Mean of `min(first serving change, period)` for straight movement at
/// speed `v`.
pub fn estimate_sojourn(
    v: f64,
    period: f64,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    plan: &ReplicationPlan,
) -> Result<Estimate, SimulationError> {
    check_speed(v)?;
    dep.validate()?;
    if !(period > 0.0) || !period.is_finite() {
        return Err(SimulationError::InvalidInput(format!("period must be positive, got {period}")));
    }
    if dep.tiers().len() != 1 {
        return Err(SimulationError::Unsupported(format!(
            "sojourn time needs convex cells; got {} tiers",
            dep.tiers().len()
        )));
    }
    let times = plan.run(|seed| {
        if v == 0.0 {
            return Ok(period);
        }
        let mut rng = rng_from_seed(seed);
        let theta = 2.0 * PI * rng.random::<f64>();
        let reach = v * period + 1.0;
        let d = dep.realize([reach, reach], dep.default_guard(), &mut rng)?;
        let seg = straight(theta, v, period);
        let first = detect_in_segments(&[seg], &d, policy, probe_limit(&d, v), 1)?;
        Ok(first.first().map_or(period, |e| e.time.min(period)))
    })?;
    Ok(Estimate::from_samples(&times))
}

/// Joint table of initial tier, handoff outcome and end-of-period coverage,
/// with the standard error of every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointCoverageEstimate {
    pub table: JointCoverageTable,
    /// Same layout as `table`, holding standard errors.
    pub std_error: JointCoverageTable,
    pub n: usize,
}

impl JointCoverageEstimate {
    /// `Σ_j` of row `k` (no handoff plus all handoff targets) as an estimate;
    /// the cells of one row are disjoint outcomes of one indicator.
    pub fn row_sum(&self, k: usize) -> Estimate {
        let p = self.table.no_handoff[k] + self.table.handoff[k].iter().sum::<f64>();
        Estimate::new(p, (p * (1.0 - p) / self.n as f64).sqrt(), self.n)
    }
}

struct CoverageOutcome {
    k: usize,
    j: usize,
    moved: bool,
    covered: bool,
}

/// SIR of `serving` at `u` with unit-mean Rayleigh fading and intra-tier
/// interference only.
fn sir<R: Rng + ?Sized>(u: Point, dep: &Deployment, serving: BsId, tier: &Tier, rng: &mut R) -> f64 {
    let gain = |p: &Point, h: f64| {
        let d2 = (p[0] - u[0]).powi(2) + (p[1] - u[1]).powi(2);
        tier.tx_power * h * d2.powf(-0.5 * tier.pathloss_exponent)
    };
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, p) in dep.points(serving.tier).iter().enumerate() {
        let h: f64 = Exp1.sample(rng);
        if i == serving.index {
            signal = gain(p, h);
        } else {
            interference += gain(p, h);
        }
    }
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

pub fn estimate_joint_coverage_handoff(
    v: f64,
    spec: &CoverageSpec,
    dep: &DeploymentSpec,
    policy: AssociationPolicy,
    plan: &ReplicationPlan,
) -> Result<JointCoverageEstimate, SimulationError> {
    check_speed(v)?;
    dep.validate()?;
    spec.validate()?;
    let tiers = dep.tiers();
    let n_tiers = tiers.len();
    if spec.tau.len() != n_tiers {
        return Err(SimulationError::InvalidInput(format!(
            "{} thresholds for {n_tiers} tiers",
            spec.tau.len()
        )));
    }
    let sparsest = tiers.iter().map(|t| t.density).fold(f64::INFINITY, f64::min);
    let guard = COVERAGE_GUARD_RADII * mean_cell_radius(sparsest);
    let outcomes = plan.run(|seed| {
        let mut rng = rng_from_seed(seed);
        let theta = 2.0 * PI * rng.random::<f64>();
        let d = dep.realize([v + 1.0, v + 1.0], guard, &mut rng)?;
        let end = [v * theta.cos(), v * theta.sin()];
        let first = serve([0.0, 0.0], &d, policy)?;
        let last = serve(end, &d, policy)?;
        let gamma = sir(end, &d, last, &tiers[last.tier], &mut rng);
        Ok(CoverageOutcome {
            k: first.tier,
            j: last.tier,
            moved: first != last,
            covered: gamma >= spec.tau[last.tier],
        })
    })?;
    let n = outcomes.len();
    let zeros = || vec![0usize; n_tiers];
    let (mut assoc, mut stay, mut stay_cov) = (zeros(), zeros(), zeros());
    let mut moved = vec![zeros(); n_tiers];
    let mut moved_cov = vec![zeros(); n_tiers];
    for o in &outcomes {
        assoc[o.k] += 1;
        if o.moved {
            moved[o.k][o.j] += 1;
            moved_cov[o.k][o.j] += o.covered as usize;
        } else {
            stay[o.k] += 1;
            stay_cov[o.k] += o.covered as usize;
        }
    }
    let est = |c: usize| Estimate::proportion(c, n);
    let build = |f: &dyn Fn(Estimate) -> f64| JointCoverageTable {
        association: assoc.iter().map(|c| f(est(*c))).collect(),
        no_handoff: stay.iter().map(|c| f(est(*c))).collect(),
        handoff: moved.iter().map(|r| r.iter().map(|c| f(est(*c))).collect()).collect(),
        covered_no_handoff: stay_cov.iter().map(|c| f(est(*c))).collect(),
        covered_handoff: moved_cov.iter().map(|r| r.iter().map(|c| f(est(*c))).collect()).collect(),
    };
    Ok(JointCoverageEstimate {
        table: build(&|e| e.mean),
        std_error: build(&|e| e.std_error),
        n,
    })
}
