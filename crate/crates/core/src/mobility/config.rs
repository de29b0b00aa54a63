use serde::{Deserialize, Serialize};

use super::MobilityError;
use crate::analysis::MobilityMoments;
use crate::geometry::{Point, Region};

/// What happens when a confined model reaches the edge of its region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Re-enter from the opposite side (rectangles only).
    #[default]
    Wrap,
    /// Mirror the direction about the boundary normal.
    Reflect,
}

/// Optional confinement of an otherwise unbounded model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub region: Region,
    #[serde(default)]
    pub mode: BoundaryMode,
}

impl Bounds {
    fn validate(&self) -> Result<(), MobilityError> {
        self.region
            .validate()
            .map_err(|e| MobilityError::InvalidConfig(format!("bounds.region: {e}")))?;
        if self.mode == BoundaryMode::Wrap && matches!(self.region, Region::Disk { .. }) {
            return Err(MobilityError::InvalidConfig(
                "bounds.mode: wrap-around needs a rectangular region; use reflect for disks".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySpec {
    Constant { v: f64 },
    Uniform { v_min: f64, v_max: f64 },
}

impl VelocitySpec {
    fn validate(&self, field: &str) -> Result<(), MobilityError> {
        match *self {
            VelocitySpec::Constant { v } => check(v > 0.0 && v.is_finite(), || format!("{field}.v must be positive, got {v}")),
            VelocitySpec::Uniform { v_min, v_max } => check(
                v_min > 0.0 && v_max > v_min && v_max.is_finite(),
                || format!("{field} needs 0 < v_min < v_max, got [{v_min}, {v_max}]"),
            ),
        }
    }

    /// `E[1/V]`.
    fn mean_inverse(&self) -> f64 {
        match *self {
            VelocitySpec::Constant { v } => 1.0 / v,
            VelocitySpec::Uniform { v_min, v_max } => (v_max / v_min).ln() / (v_max - v_min),
        }
    }

    pub fn max_speed(&self) -> f64 {
        match *self {
            VelocitySpec::Constant { v } => v,
            VelocitySpec::Uniform { v_max, .. } => v_max,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), MobilityError> {
    if cond {
        Ok(())
    } else {
        Err(MobilityError::InvalidConfig(msg()))
    }
}

fn non_negative(name: &str, x: f64) -> Result<(), MobilityError> {
    check(x >= 0.0 && x.is_finite(), || format!("{name} must be non-negative, got {x}"))
}

fn positive(name: &str, x: f64) -> Result<(), MobilityError> {
    check(x > 0.0 && x.is_finite(), || format!("{name} must be positive, got {x}"))
}

/// Uniform direction, truncated-Gaussian speed, fixed flight time, no pause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomWalkConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub sigma_v: f64,
    pub mean_v: f64,
    pub fixed_t: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

/// Random waypoint: uniform waypoints in `region`, uniform speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RwpConfig {
    pub region: Region,
    pub v_min: f64,
    pub v_max: f64,
    #[serde(default)]
    pub pause: f64,
}

/// Uniform direction with Rayleigh flight length of waypoint intensity `λ_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MrdConfig {
    pub waypoint_intensity: f64,
    pub velocity: VelocitySpec,
    #[serde(default)]
    pub pause: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

/// Truncated Lévy walk: symmetric stable flight lengths and pauses, `T = κ·L^{1−ρ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyConfig {
    pub levy_exponent: f64,
    pub scale: f64,
    pub pause_exponent: f64,
    pub pause_scale: f64,
    pub kappa: f64,
    pub rho: f64,
    pub l_max: f64,
    pub tp_max: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferredSpeed {
    pub speed: f64,
    pub probability: f64,
}

/// Smooth random mobility: Poisson speed-change events towards targets drawn
/// from preferred point masses plus a uniform remainder on `[0, V_m]`,
/// approached with uniformly distributed acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothRandomConfig {
    pub v_max: f64,
    #[serde(default)]
    pub preferred_speeds: Vec<PreferredSpeed>,
    /// Speed-change events per second.
    pub speed_change_rate: f64,
    /// Direction-change events per second (new direction uniform).
    #[serde(default)]
    pub direction_change_rate: f64,
    /// `|a|` is uniform on `(0, accel_max]`.
    pub accel_max: f64,
    pub dt: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

/// Gauss–Markov speed and direction, updated every `dt` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussMarkovConfig {
    /// Memory `α_g ∈ [0, 1]`.
    pub alpha: f64,
    pub mean_speed: f64,
    #[serde(default)]
    pub mean_direction: f64,
    pub sigma_speed: f64,
    pub sigma_direction: f64,
    pub dt: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

/// Speeds chosen by leg length: pedestrian below the threshold, vehicular above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityRule {
    pub distance_threshold: f64,
    pub pedestrian: VelocitySpec,
    pub vehicular: VelocitySpec,
}

/// Waypoints visited according to a finite Markov chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovianWaypointConfig {
    pub waypoints: Vec<Point>,
    pub transition: Vec<Vec<f64>>,
    pub velocity: VelocityRule,
    #[serde(default)]
    pub pause: f64,
}

/// Drone whose 3-D velocity is uniform in the ball of radius `(4/3)·v̄`,
/// redrawn every `step` seconds; only the ground projection is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drone3dConfig {
    pub mean_speed: f64,
    #[serde(default = "one_second")]
    pub step: f64,
    #[serde(default)]
    pub bounds: Option<Bounds>,
}

fn one_second() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelConfig {
    RandomWalk(RandomWalkConfig),
    Rwp(RwpConfig),
    ModifiedRandomDirection(MrdConfig),
    TruncatedLevy(LevyConfig),
    SmoothRandom(SmoothRandomConfig),
    GaussMarkov(GaussMarkovConfig),
    MarkovianWaypoint(MarkovianWaypointConfig),
    Drone3d(Drone3dConfig),
}

impl ModelConfig {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelConfig::RandomWalk(_) => "random_walk",
            ModelConfig::Rwp(_) => "rwp",
            ModelConfig::ModifiedRandomDirection(_) => "modified_random_direction",
            ModelConfig::TruncatedLevy(_) => "truncated_levy",
            ModelConfig::SmoothRandom(_) => "smooth_random",
            ModelConfig::GaussMarkov(_) => "gauss_markov",
            ModelConfig::MarkovianWaypoint(_) => "markovian_waypoint",
            ModelConfig::Drone3d(_) => "drone3d",
        }
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        match self {
            ModelConfig::RandomWalk(c) => {
                check(c.v_min >= 0.0 && c.v_max > c.v_min && c.v_max.is_finite(), || {
                    format!("random_walk needs 0 <= v_min < v_max, got [{}, {}]", c.v_min, c.v_max)
                })?;
                positive("sigma_v", c.sigma_v)?;
                check(c.mean_v.is_finite(), || format!("mean_v = {}", c.mean_v))?;
                positive("fixed_t", c.fixed_t)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
            ModelConfig::Rwp(c) => {
                c.region
                    .validate()
                    .map_err(|e| MobilityError::InvalidConfig(format!("region: {e}")))?;
                check(c.v_min > 0.0 && c.v_max >= c.v_min && c.v_max.is_finite(), || {
                    format!("rwp needs 0 < v_min <= v_max, got [{}, {}]", c.v_min, c.v_max)
                })?;
                non_negative("pause", c.pause)
            }
            ModelConfig::ModifiedRandomDirection(c) => {
                positive("waypoint_intensity", c.waypoint_intensity)?;
                c.velocity.validate("velocity")?;
                non_negative("pause", c.pause)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
            ModelConfig::TruncatedLevy(c) => {
                check(c.levy_exponent > 0.0 && c.levy_exponent <= 2.0, || {
                    format!("levy_exponent must lie in (0, 2], got {}", c.levy_exponent)
                })?;
                check(c.pause_exponent > 0.0 && c.pause_exponent <= 2.0, || {
                    format!("pause_exponent must lie in (0, 2], got {}", c.pause_exponent)
                })?;
                positive("scale", c.scale)?;
                non_negative("pause_scale", c.pause_scale)?;
                positive("kappa", c.kappa)?;
                check((0.0..=1.0).contains(&c.rho), || format!("rho must lie in [0, 1], got {}", c.rho))?;
                positive("l_max", c.l_max)?;
                non_negative("tp_max", c.tp_max)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
            ModelConfig::SmoothRandom(c) => {
                positive("v_max", c.v_max)?;
                let mut total = 0.0;
                for (i, p) in c.preferred_speeds.iter().enumerate() {
                    check(p.speed >= 0.0 && p.speed <= c.v_max, || {
                        format!("preferred_speeds[{i}].speed must lie in [0, v_max], got {}", p.speed)
                    })?;
                    check(p.probability >= 0.0, || {
                        format!("preferred_speeds[{i}].probability = {}", p.probability)
                    })?;
                    total += p.probability;
                }
                check(total <= 1.0 + 1e-12, || format!("preferred speed probabilities sum to {total} > 1"))?;
                positive("speed_change_rate", c.speed_change_rate)?;
                non_negative("direction_change_rate", c.direction_change_rate)?;
                positive("accel_max", c.accel_max)?;
                positive("dt", c.dt)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
            ModelConfig::GaussMarkov(c) => {
                check((0.0..=1.0).contains(&c.alpha), || format!("alpha must lie in [0, 1], got {}", c.alpha))?;
                non_negative("mean_speed", c.mean_speed)?;
                check(c.mean_direction.is_finite(), || format!("mean_direction = {}", c.mean_direction))?;
                non_negative("sigma_speed", c.sigma_speed)?;
                non_negative("sigma_direction", c.sigma_direction)?;
                positive("dt", c.dt)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
            ModelConfig::MarkovianWaypoint(c) => {
                let n = c.waypoints.len();
                check(n >= 1, || "markovian_waypoint needs at least one waypoint".into())?;
                check(c.transition.len() == n, || {
                    format!("transition has {} rows for {n} waypoints", c.transition.len())
                })?;
                for (i, row) in c.transition.iter().enumerate() {
                    check(row.len() == n, || format!("transition[{i}] has {} entries, expected {n}", row.len()))?;
                    check(row.iter().all(|p| *p >= 0.0 && p.is_finite()), || {
                        format!("transition[{i}] has a negative entry")
                    })?;
                    let s: f64 = row.iter().sum();
                    check((s - 1.0).abs() < 1e-9, || format!("transition[{i}] sums to {s}, expected 1"))?;
                }
                check(c.waypoints.iter().all(|p| p[0].is_finite() && p[1].is_finite()), || {
                    "waypoints must be finite".into()
                })?;
                non_negative("velocity.distance_threshold", c.velocity.distance_threshold)?;
                c.velocity.pedestrian.validate("velocity.pedestrian")?;
                c.velocity.vehicular.validate("velocity.vehicular")?;
                non_negative("pause", c.pause)
            }
            ModelConfig::Drone3d(c) => {
                positive("mean_speed", c.mean_speed)?;
                positive("step", c.step)?;
                c.bounds.map_or(Ok(()), |b| b.validate())
            }
        }
    }

    /// Largest speed the model can produce, if bounded.
    pub fn max_speed(&self) -> Option<f64> {
        match self {
            ModelConfig::RandomWalk(c) => Some(c.v_max),
            ModelConfig::Rwp(c) => Some(c.v_max),
            ModelConfig::ModifiedRandomDirection(c) => Some(c.velocity.max_speed()),
            ModelConfig::TruncatedLevy(c) => {
                // V = L^ρ / κ, maximal at the truncation bound.
                Some(c.l_max.powf(c.rho) / c.kappa)
            }
            ModelConfig::SmoothRandom(c) => Some(c.v_max),
            ModelConfig::GaussMarkov(_) => None,
            ModelConfig::MarkovianWaypoint(c) => Some(c.velocity.pedestrian.max_speed().max(c.velocity.vehicular.max_speed())),
            ModelConfig::Drone3d(c) => Some(4.0 / 3.0 * c.mean_speed),
        }
    }

    /// Moments entering the Buffon rate formula, when they have a closed
    /// form. `e_v` is the time-averaged speed `E[L]/E[T]`, which equals
    /// `E[V]` for constant-speed flights.
    pub fn moments(&self) -> Option<MobilityMoments> {
        match self {
            ModelConfig::RandomWalk(c) => {
                let m = super::pdf::truncated_normal_mean(c.mean_v, c.sigma_v, c.v_min, c.v_max);
                Some(MobilityMoments::new(m, c.fixed_t, 0.0))
            }
            ModelConfig::Rwp(c) => {
                let e_l = super::pdf::rwp_mean_flight_length(&c.region)?;
                let inv = if c.v_max > c.v_min {
                    (c.v_max / c.v_min).ln() / (c.v_max - c.v_min)
                } else {
                    1.0 / c.v_min
                };
                let e_t = e_l * inv;
                Some(MobilityMoments::new(e_l / e_t, e_t, c.pause))
            }
            ModelConfig::ModifiedRandomDirection(c) => {
                let e_l = 0.5 / c.waypoint_intensity.sqrt();
                let e_t = e_l * c.velocity.mean_inverse();
                Some(MobilityMoments::new(e_l / e_t, e_t, c.pause))
            }
            ModelConfig::Drone3d(c) => {
                // Horizontal speed v·sin φ with E[v] = v̄ and E[sin φ] = π/4.
                Some(MobilityMoments::new(c.mean_speed * std::f64::consts::FRAC_PI_4, c.step, 0.0))
            }
            _ => None,
        }
    }

    /// Copy of the model moving at (mean) speed `v`, for velocity sweeps.
    pub fn with_speed(&self, v: f64) -> Result<ModelConfig, MobilityError> {
        positive("v", v)?;
        let mut out = self.clone();
        match &mut out {
            ModelConfig::Rwp(c) => {
                c.v_min = v;
                c.v_max = v;
            }
            ModelConfig::ModifiedRandomDirection(c) => c.velocity = VelocitySpec::Constant { v },
            ModelConfig::GaussMarkov(c) => c.mean_speed = v,
            ModelConfig::Drone3d(c) => c.mean_speed = v,
            other => {
                return Err(MobilityError::InvalidConfig(format!(
                    "{} has no single speed parameter to sweep",
                    other.tag()
                )))
            }
        }
        Ok(out)
    }

    /// Confinement of the model, if any.
    pub fn bounds(&self) -> Option<Bounds> {
        match self {
            ModelConfig::RandomWalk(c) => c.bounds,
            ModelConfig::Rwp(c) => Some(Bounds {
                region: c.region,
                mode: BoundaryMode::Reflect,
            }),
            ModelConfig::ModifiedRandomDirection(c) => c.bounds,
            ModelConfig::TruncatedLevy(c) => c.bounds,
            ModelConfig::SmoothRandom(c) => c.bounds,
            ModelConfig::GaussMarkov(c) => c.bounds,
            ModelConfig::MarkovianWaypoint(_) => None,
            ModelConfig::Drone3d(c) => c.bounds,
        }
    }
}
