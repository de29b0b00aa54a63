use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::*;
use super::pdf::draw_drone_step;
use super::{MobilityError, Segment, Trajectory};
use crate::geometry::{Point, Region};
use crate::rng::rng_from_seed;

/// Upper bound on boundary pieces per flight before giving up.
const MAX_PIECES: usize = 1_000_000;
/// Upper bound on flights for duration-targeted generation.
const MAX_FLIGHTS: usize = 50_000_000;

/// Samples `n_segments` flights starting at `start`. Boundary handling may
/// split a flight into several segments.
pub fn generate_trajectory(
    config: &ModelConfig,
    n_segments: usize,
    start: Point,
    seed: u64,
) -> Result<Trajectory, MobilityError> {
    let mut rng = rng_from_seed(seed);
    Ok(Trajectory {
        model_tag: config.tag().to_string(),
        seed,
        segments: generate_trajectory_with_rng(config, n_segments, start, &mut rng)?,
    })
}

pub fn generate_trajectory_with_rng<R: Rng + ?Sized>(
    config: &ModelConfig,
    n_segments: usize,
    start: Point,
    rng: &mut R,
) -> Result<Vec<Segment>, MobilityError> {
    if n_segments == 0 {
        return Err(MobilityError::InvalidRequest("n_segments must be at least 1".into()));
    }
    run(config, start, rng, |flights, _| flights >= n_segments)
}

/// Samples whole flights until their total duration reaches `horizon`.
pub fn generate_for_duration<R: Rng + ?Sized>(
    config: &ModelConfig,
    horizon: f64,
    start: Point,
    rng: &mut R,
) -> Result<Vec<Segment>, MobilityError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(MobilityError::InvalidRequest(format!("horizon must be positive, got {horizon}")));
    }
    let segs = run(config, start, rng, |flights, elapsed| elapsed >= horizon || flights >= MAX_FLIGHTS)?;
    let total: f64 = segs.iter().map(Segment::duration).sum();
    if total < horizon {
        return Err(MobilityError::InvalidRequest(format!(
            "model makes no progress in time: {MAX_FLIGHTS} flights last {total} s"
        )));
    }
    Ok(segs)
}

fn run<R: Rng + ?Sized>(
    config: &ModelConfig,
    start: Point,
    rng: &mut R,
    mut done: impl FnMut(usize, f64) -> bool,
) -> Result<Vec<Segment>, MobilityError> {
    config.validate()?;
    if !(start[0].is_finite() && start[1].is_finite()) {
        return Err(MobilityError::InvalidRequest(format!("start {start:?} is not finite")));
    }
    // Waypoint models move between points of a convex set; no clipping needed.
    let confine = match config {
        ModelConfig::Rwp(c) => {
            if !c.region.contains(start) {
                return Err(MobilityError::InvalidRequest(format!("start {start:?} lies outside the rwp region")));
            }
            None
        }
        ModelConfig::MarkovianWaypoint(_) => None,
        _ => config.bounds(),
    };
    if let Some(b) = confine {
        if !b.region.contains(start) {
            return Err(MobilityError::InvalidRequest(format!("start {start:?} lies outside the bounds")));
        }
    }
    let mut em = Emitter {
        segs: Vec::new(),
        pos: start,
        bounds: confine,
        wrap_next: false,
        elapsed: 0.0,
    };
    let mut model = Model::new(config, start, rng);
    let mut flights = 0;
    while !done(flights, em.elapsed) {
        model.step(&mut em, rng)?;
        flights += 1;
    }
    Ok(em.segs)
}

struct Emitter {
    segs: Vec<Segment>,
    pos: Point,
    bounds: Option<Bounds>,
    wrap_next: bool,
    elapsed: f64,
}

impl Emitter {
    fn push(&mut self, theta: f64, length: f64, speed: f64, flight_time: f64, pause: f64) {
        let seg = Segment {
            start: self.pos,
            theta,
            length,
            speed,
            flight_time,
            pause,
            wrapped: std::mem::take(&mut self.wrap_next),
        };
        self.pos = seg.end();
        self.elapsed += seg.duration();
        self.segs.push(seg);
    }

    /// Stationary for `duration` seconds.
    fn idle(&mut self, theta: f64, duration: f64) {
        self.push(theta, 0.0, 0.0, duration, 0.0);
    }

    /// A straight flight at constant speed, split at the region boundary.
    fn flight(&mut self, theta: f64, length: f64, speed: f64, pause: f64) -> Result<(), MobilityError> {
        if length == 0.0 {
            self.push(theta, 0.0, speed, 0.0, pause);
            return Ok(());
        }
        let Some(bounds) = self.bounds else {
            self.push(theta, length, speed, length / speed, pause);
            return Ok(());
        };
        let (mut theta, mut left) = (theta, length);
        for _ in 0..MAX_PIECES {
            let dir = [theta.cos(), theta.sin()];
            let (t, normal) = bounds.region.exit_along(self.pos, dir);
            if t >= left {
                self.push(theta, left, speed, left / speed, pause);
                return Ok(());
            }
            if t > 0.0 {
                self.push(theta, t, speed, t / speed, 0.0);
                left -= t;
            }
            match bounds.mode {
                BoundaryMode::Reflect => {
                    let dot = dir[0] * normal[0] + dir[1] * normal[1];
                    theta = (dir[1] - 2.0 * dot * normal[1]).atan2(dir[0] - 2.0 * dot * normal[0]);
                }
                BoundaryMode::Wrap => {
                    let Region::Rectangle { width, height } = bounds.region else {
                        unreachable!("wrap-around is rejected for disks at validation");
                    };
                    self.pos = [self.pos[0] - normal[0] * width, self.pos[1] - normal[1] * height];
                    self.wrap_next = true;
                }
            }
        }
        Err(MobilityError::InvalidRequest(format!(
            "flight of length {length} needs more than {MAX_PIECES} boundary pieces"
        )))
    }

    fn inside_after(&self, theta: f64, length: f64) -> bool {
        match self.bounds {
            None => true,
            Some(b) => b.region.contains([self.pos[0] + length * theta.cos(), self.pos[1] + length * theta.sin()]),
        }
    }
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * PI * rng.random::<f64>()
}

fn uniform_in<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn speed_from<R: Rng + ?Sized>(spec: &VelocitySpec, rng: &mut R) -> f64 {
    match *spec {
        VelocitySpec::Constant { v } => v,
        VelocitySpec::Uniform { v_min, v_max } => uniform_in(v_min, v_max, rng),
    }
}

/// Symmetric α-stable variate (unit scale) by the Chambers–Mallows–Stuck
/// construction.
pub(crate) fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        return u.tan();
    }
    (alpha * u).sin() / u.cos().powf(1.0 / alpha) * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
}

fn truncated_stable<R: Rng + ?Sized>(alpha: f64, scale: f64, max: f64, rng: &mut R) -> f64 {
    loop {
        let x = scale * symmetric_stable(alpha, rng).abs();
        if x <= max && x.is_finite() {
            return x;
        }
    }
}

enum Model<'a> {
    RandomWalk {
        c: &'a RandomWalkConfig,
        cdf_lo: f64,
        cdf_hi: f64,
    },
    Rwp(&'a RwpConfig),
    Mrd(&'a MrdConfig),
    Levy(&'a LevyConfig),
    Smooth {
        c: &'a SmoothRandomConfig,
        speed: f64,
        target: f64,
        accel: f64,
        theta: f64,
    },
    GaussMarkov {
        c: &'a GaussMarkovConfig,
        speed: f64,
        theta: f64,
    },
    Markov {
        c: &'a MarkovianWaypointConfig,
        state: usize,
    },
    Drone(&'a Drone3dConfig),
}

fn smooth_target<R: Rng + ?Sized>(c: &SmoothRandomConfig, rng: &mut R) -> f64 {
    let mut u = rng.random::<f64>();
    for p in &c.preferred_speeds {
        if u < p.probability {
            return p.speed;
        }
        u -= p.probability;
    }
    uniform_in(0.0, c.v_max, rng)
}

/// `|a|` uniform on `(0, accel_max]`, signed towards the target.
fn smooth_accel<R: Rng + ?Sized>(c: &SmoothRandomConfig, speed: f64, target: f64, rng: &mut R) -> f64 {
    let mag = c.accel_max * (1.0 - rng.random::<f64>());
    if target >= speed {
        mag
    } else {
        -mag
    }
}

impl<'a> Model<'a> {
    fn new<R: Rng + ?Sized>(config: &'a ModelConfig, start: Point, rng: &mut R) -> Self {
        match config {
            ModelConfig::RandomWalk(c) => {
                let n = Normal::standard();
                Model::RandomWalk {
                    c,
                    cdf_lo: n.cdf((c.v_min - c.mean_v) / c.sigma_v),
                    cdf_hi: n.cdf((c.v_max - c.mean_v) / c.sigma_v),
                }
            }
            ModelConfig::Rwp(c) => Model::Rwp(c),
            ModelConfig::ModifiedRandomDirection(c) => Model::Mrd(c),
            ModelConfig::TruncatedLevy(c) => Model::Levy(c),
            ModelConfig::SmoothRandom(c) => {
                let speed = smooth_target(c, rng);
                Model::Smooth {
                    c,
                    speed,
                    target: speed,
                    accel: 0.0,
                    theta: uniform_angle(rng),
                }
            }
            ModelConfig::GaussMarkov(c) => {
                let w1: f64 = StandardNormal.sample(rng);
                let w2: f64 = StandardNormal.sample(rng);
                Model::GaussMarkov {
                    c,
                    speed: c.mean_speed + c.sigma_speed * w1,
                    theta: c.mean_direction + c.sigma_direction * w2,
                }
            }
            ModelConfig::MarkovianWaypoint(c) => {
                let d2 = |p: &Point| (p[0] - start[0]).powi(2) + (p[1] - start[1]).powi(2);
                let state = (0..c.waypoints.len())
                    .min_by(|&a, &b| d2(&c.waypoints[a]).total_cmp(&d2(&c.waypoints[b])))
                    .unwrap_or(0);
                Model::Markov { c, state }
            }
            ModelConfig::Drone3d(c) => Model::Drone(c),
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, em: &mut Emitter, rng: &mut R) -> Result<(), MobilityError> {
        match self {
            Model::RandomWalk { c, cdf_lo, cdf_hi } => {
                let theta = uniform_angle(rng);
                let u = uniform_in(*cdf_lo, *cdf_hi, rng).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                let v = (c.mean_v + c.sigma_v * Normal::standard().inverse_cdf(u)).clamp(c.v_min, c.v_max);
                if v == 0.0 {
                    em.idle(theta, c.fixed_t);
                    Ok(())
                } else {
                    em.flight(theta, v * c.fixed_t, v, 0.0)
                }
            }
            Model::Rwp(c) => {
                let w = c.region.sample_uniform(rng);
                let (dx, dy) = (w[0] - em.pos[0], w[1] - em.pos[1]);
                let v = uniform_in(c.v_min, c.v_max, rng);
                em.flight(dy.atan2(dx), dx.hypot(dy), v, c.pause)
            }
            Model::Mrd(c) => {
                let theta = uniform_angle(rng);
                let u = 1.0 - rng.random::<f64>();
                let l = (-u.ln() / (PI * c.waypoint_intensity)).sqrt();
                let v = speed_from(&c.velocity, rng);
                em.flight(theta, l, v, c.pause)
            }
            Model::Levy(c) => {
                let theta = uniform_angle(rng);
                let l = truncated_stable(c.levy_exponent, c.scale, c.l_max, rng);
                let pause = if c.pause_scale > 0.0 && c.tp_max > 0.0 {
                    truncated_stable(c.pause_exponent, c.pause_scale, c.tp_max, rng)
                } else {
                    0.0
                };
                if l == 0.0 {
                    em.push(theta, 0.0, 0.0, 0.0, pause);
                    return Ok(());
                }
                // T = κ·L^{1−ρ}, hence V = L^ρ / κ.
                let t = c.kappa * l.powf(1.0 - c.rho);
                em.flight(theta, l, l / t, pause)
            }
            Model::Smooth {
                c,
                speed,
                target,
                accel,
                theta,
            } => {
                let dt = c.dt;
                if rng.random::<f64>() < -(-c.speed_change_rate * dt).exp_m1() {
                    *target = smooth_target(c, rng);
                    *accel = smooth_accel(c, *speed, *target, rng);
                }
                if c.direction_change_rate > 0.0 && rng.random::<f64>() < -(-c.direction_change_rate * dt).exp_m1() {
                    *theta = uniform_angle(rng);
                }
                // Linear ramp towards the target, then cruise.
                let s0 = *speed;
                let gap = *target - s0;
                let distance = if gap == 0.0 || *accel == 0.0 {
                    s0 * dt
                } else {
                    let tau = (gap / *accel).clamp(0.0, dt);
                    let s_tau = s0 + *accel * tau;
                    *speed = if tau < dt { *target } else { s_tau };
                    0.5 * (s0 + s_tau) * tau + *speed * (dt - tau)
                };
                if *speed == *target {
                    *accel = 0.0;
                }
                if distance <= 0.0 {
                    em.idle(*theta, dt);
                    return Ok(());
                }
                em.flight(*theta, distance, distance / dt, 0.0)
            }
            Model::GaussMarkov { c, speed, theta } => {
                let mut heading = if *speed < 0.0 { *theta + PI } else { *theta };
                let l = speed.abs() * c.dt;
                if !em.inside_after(heading, l) {
                    *theta += PI;
                    heading += PI;
                }
                let heading = heading.rem_euclid(2.0 * PI);
                if l == 0.0 {
                    em.idle(heading, c.dt);
                } else {
                    em.flight(heading, l, speed.abs(), 0.0)?;
                }
                let a = c.alpha;
                let noise = (1.0 - a * a).max(0.0).sqrt();
                let w1: f64 = StandardNormal.sample(rng);
                let w2: f64 = StandardNormal.sample(rng);
                if a < 1.0 {
                    *speed = a * *speed + (1.0 - a) * c.mean_speed + noise * c.sigma_speed * w1;
                    *theta = a * *theta + (1.0 - a) * c.mean_direction + noise * c.sigma_direction * w2;
                }
                Ok(())
            }
            Model::Markov { c, state } => {
                let row = &c.transition[*state];
                let mut u = rng.random::<f64>();
                let mut next = row.len() - 1;
                for (j, p) in row.iter().enumerate() {
                    if u < *p {
                        next = j;
                        break;
                    }
                    u -= p;
                }
                *state = next;
                let w = c.waypoints[next];
                let (dx, dy) = (w[0] - em.pos[0], w[1] - em.pos[1]);
                let l = dx.hypot(dy);
                let spec = if l <= c.velocity.distance_threshold {
                    &c.velocity.pedestrian
                } else {
                    &c.velocity.vehicular
                };
                let v = speed_from(spec, rng);
                em.flight(dy.atan2(dx), l, v, c.pause)
            }
            Model::Drone(c) => {
                let s = draw_drone_step(c.mean_speed, rng);
                let vh = s.horizontal_speed();
                if vh <= 0.0 {
                    em.idle(s.theta, c.step);
                    Ok(())
                } else {
                    em.flight(s.theta, vh * c.step, vh, 0.0)
                }
            }
        }
    }
}
