//! Closed-form flight-length, flight-time and drone-velocity densities.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use super::config::{MrdConfig, RandomWalkConfig, RwpConfig, VelocitySpec};
use super::{generate_trajectory, MobilityError, ModelConfig};
use crate::analysis::{integrate, QuadratureSpec};
use crate::geometry::Region;
use crate::rng::rng_from_seed;

fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Density of the distance between two independent uniform points of
/// `region` (the RWP flight length). Rectangles are normalized to `a ≥ b`.
pub fn rwp_flight_length_pdf(l: f64, region: &Region) -> f64 {
    match *region {
        Region::Rectangle { width, height } => {
            let (a, b) = if width >= height { (width, height) } else { (height, width) };
            if !(0.0..=(a * a + b * b).sqrt()).contains(&l) {
                return 0.0;
            }
            let g = if l <= b {
                PI / 2.0 * a * b - (a + b) * l + 0.5 * l * l
            } else if l <= a {
                a * b * (b / l).asin() + a * (l * l - b * b).sqrt() - 0.5 * b * b - a * l
            } else {
                let bl = (b / l).min(1.0);
                let al = (a / l).min(1.0);
                a * b * (bl.asin() - al.acos()) + a * (l * l - b * b).max(0.0).sqrt()
                    + b * (l * l - a * a).max(0.0).sqrt()
                    - 0.5 * (a * a + b * b)
                    - 0.5 * l * l
            };
            (4.0 * l / (a * a * b * b) * g).max(0.0)
        }
        Region::Disk { radius: a } => {
            if !(0.0..=2.0 * a).contains(&l) {
                return 0.0;
            }
            let x = l / (2.0 * a);
            4.0 * l / (PI * a * a) * (x.acos() - x * (1.0 - x * x).max(0.0).sqrt())
        }
    }
}

/// Mean RWP flight length by quadrature.
pub fn rwp_mean_flight_length(region: &Region) -> Option<f64> {
    let (hi, bps) = match *region {
        Region::Rectangle { width, height } => (width.hypot(height), vec![width.min(height), width.max(height)]),
        Region::Disk { radius } => (2.0 * radius, vec![]),
    };
    integrate(|l| l * rwp_flight_length_pdf(l, region), 0.0, hi, &bps, &QuadratureSpec::default())
        .ok()
        .map(|q| q.value)
}

/// Rayleigh flight length of the modified random direction model,
/// `2πλ_m·l·e^{−λ_m π l²}`.
pub fn mrd_flight_length_pdf(l: f64, waypoint_intensity: f64) -> f64 {
    if l < 0.0 {
        return 0.0;
    }
    let lm = waypoint_intensity;
    2.0 * PI * lm * l * (-lm * PI * l * l).exp()
}

/// Flight-time density of the modified random direction model.
///
/// Uniform speeds use `(g(v_min) − g(v_max)) / (t·Δv)` with
/// `g(x) = x·e^{−λπt²x²} + Q(t·x·sqrt(2πλ)) / (sqrt(λ)·t)`; near `t = 0` the
/// difference cancels catastrophically, so a two-term series is used there.
pub fn mrd_flight_time_pdf(t: f64, config: &MrdConfig) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let lm = config.waypoint_intensity;
    match config.velocity {
        VelocitySpec::Constant { v } => 2.0 * PI * lm * v * v * t * (-lm * PI * v * v * t * t).exp(),
        VelocitySpec::Uniform { v_min, v_max } => {
            let dv = v_max - v_min;
            if t * v_max * (2.0 * PI * lm).sqrt() < 1e-3 {
                let c1 = 2.0 / 3.0 * PI * lm * (v_max.powi(3) - v_min.powi(3));
                let c2 = 0.4 * PI * PI * lm * lm * (v_max.powi(5) - v_min.powi(5));
                return (c1 * t - c2 * t.powi(3)) / dv;
            }
            let g = |x: f64| {
                x * (-lm * PI * t * t * x * x).exp() + q_function(t * x * (2.0 * PI * lm).sqrt()) / (lm.sqrt() * t)
            };
            ((g(v_min) - g(v_max)) / (t * dv)).max(0.0)
        }
    }
}

/// Mean of a normal `(mean, sigma)` truncated to `[lo, hi]`.
pub fn truncated_normal_mean(mean: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    let n = Normal::standard();
    let (a, b) = ((lo - mean) / sigma, (hi - mean) / sigma);
    let z = n.cdf(b) - n.cdf(a);
    if z <= 0.0 {
        return 0.5 * (lo + hi);
    }
    mean + sigma * (n.pdf(a) - n.pdf(b)) / z
}

/// Random-walk flight length `L = V·T` for truncated-Gaussian `V`.
pub fn rw_flight_length_pdf(l: f64, config: &RandomWalkConfig) -> f64 {
    let t = config.fixed_t;
    if l < config.v_min * t || l > config.v_max * t || config.sigma_v <= 0.0 {
        return 0.0;
    }
    let n = Normal::standard();
    let z = n.cdf((config.v_max - config.mean_v) / config.sigma_v) - n.cdf((config.v_min - config.mean_v) / config.sigma_v);
    n.pdf((l - t * config.mean_v) / (t * config.sigma_v)) / (t * config.sigma_v) / z
}

/// `f_v(v) = 81v²/(64v̄³)` on `[0, 4v̄/3]`.
pub fn drone_speed_pdf(v: f64, mean_speed: f64) -> f64 {
    if v < 0.0 || v > 4.0 / 3.0 * mean_speed {
        return 0.0;
    }
    81.0 * v * v / (64.0 * mean_speed.powi(3))
}

/// `f_φ(φ) = ½·sin φ` on `[0, π]`.
pub fn drone_elevation_pdf(phi: f64) -> f64 {
    if !(0.0..=PI).contains(&phi) {
        return 0.0;
    }
    0.5 * phi.sin()
}

/// One drone velocity draw: speed, elevation from the vertical, azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drone3DStep {
    pub v: f64,
    pub phi: f64,
    pub theta: f64,
}

impl Drone3DStep {
    /// Ground-projected speed `v·sin φ`.
    pub fn horizontal_speed(&self) -> f64 {
        self.v * self.phi.sin()
    }
}

pub(crate) fn draw_drone_step<R: Rng + ?Sized>(mean_speed: f64, rng: &mut R) -> Drone3DStep {
    let v_max = 4.0 / 3.0 * mean_speed;
    Drone3DStep {
        v: v_max * rng.random::<f64>().cbrt(),
        phi: (1.0 - 2.0 * rng.random::<f64>()).acos(),
        theta: 2.0 * PI * rng.random::<f64>(),
    }
}

/// Uniform velocity in the 3-D ball of radius `(4/3)·v̄`.
pub fn sample_drone_step(mean_speed: f64, seed: u64) -> Result<Drone3DStep, MobilityError> {
    if !(mean_speed > 0.0) || !mean_speed.is_finite() {
        return Err(MobilityError::InvalidConfig(format!("mean_speed must be positive, got {mean_speed}")));
    }
    Ok(draw_drone_step(mean_speed, &mut rng_from_seed(seed)))
}

/// Share of RWP legs in a disk heading away from the centre (direction within
/// `[π/2, 3π/2]` of the centre-ward radial axis at the leg origin) and
/// heading towards it (within `[−π/4, π/4]`).
pub fn rwp_direction_pdf_check(region: Region, n_samples: usize, seed: u64) -> Result<(f64, f64), MobilityError> {
    if !matches!(region, Region::Disk { .. }) {
        return Err(MobilityError::InvalidConfig("direction check needs a disk region".into()));
    }
    if n_samples == 0 {
        return Err(MobilityError::InvalidConfig("n_samples must be positive".into()));
    }
    let cfg = ModelConfig::Rwp(RwpConfig {
        region,
        v_min: 1.0,
        v_max: 1.0,
        pause: 0.0,
    });
    // The first leg starts at the fixed start point; draw one extra leg.
    let traj = generate_trajectory(&cfg, n_samples + 1, [0.0, 0.0], seed)?;
    let (mut outward, mut inward) = (0usize, 0usize);
    for seg in &traj.segments()[1..] {
        let p = seg.start;
        let to_centre = (-p[1]).atan2(-p[0]);
        let mut rel = (seg.theta - to_centre).rem_euclid(2.0 * PI);
        if rel > PI {
            rel -= 2.0 * PI;
        }
        if rel.abs() >= FRAC_PI_2 {
            outward += 1;
        }
        if rel.abs() <= FRAC_PI_4 {
            inward += 1;
        }
    }
    let n = n_samples as f64;
    Ok((outward as f64 / n, inward as f64 / n))
}
