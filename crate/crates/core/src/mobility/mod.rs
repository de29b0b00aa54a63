//! Random synthetic mobility models: trajectory sampling and the
//! flight-length / flight-time densities used to validate them.
//!
//! A trajectory is a chain of straight [`Segment`]s. Each sampled flight
//! becomes one segment unless a confining region splits it at the boundary.

mod config;
mod generate;
pub mod pdf;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

pub use config::{
    BoundaryMode, Bounds, Drone3dConfig, GaussMarkovConfig, LevyConfig, MarkovianWaypointConfig, ModelConfig,
    MrdConfig, PreferredSpeed, RandomWalkConfig, RwpConfig, SmoothRandomConfig, VelocityRule, VelocitySpec,
};
pub use generate::{generate_for_duration, generate_trajectory, generate_trajectory_with_rng};
pub use pdf::{
    drone_elevation_pdf, drone_speed_pdf, mrd_flight_length_pdf, mrd_flight_time_pdf, rw_flight_length_pdf,
    rwp_direction_pdf_check, rwp_flight_length_pdf, rwp_mean_flight_length, sample_drone_step,
    truncated_normal_mean, Drone3DStep,
};

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("invalid mobility config: {0}")]
    InvalidConfig(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("trajectory is inconsistent: {0}")]
    BrokenChain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One straight piece of movement followed by a pause.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point,
    /// Heading in radians.
    pub theta: f64,
    pub length: f64,
    pub speed: f64,
    pub flight_time: f64,
    pub pause: f64,
    /// Set when the segment re-enters a wrap-around region from the opposite
    /// side, i.e. its start does not equal the previous end.
    #[serde(default)]
    pub wrapped: bool,
}

impl Segment {
    pub fn end(&self) -> Point {
        self.point_at(self.length)
    }

    /// Point at arc length `s` along the segment.
    pub fn point_at(&self, s: f64) -> Point {
        [self.start[0] + s * self.theta.cos(), self.start[1] + s * self.theta.sin()]
    }

    /// Position `t` seconds after the segment starts (pause included).
    pub fn position_at_time(&self, t: f64) -> Point {
        if t >= self.flight_time || self.flight_time == 0.0 {
            self.end()
        } else {
            self.point_at(self.speed * t.max(0.0))
        }
    }

    /// Flight plus pause.
    pub fn duration(&self) -> f64 {
        self.flight_time + self.pause
    }

    fn check(&self) -> Result<(), String> {
        let finite = self.start.iter().all(|c| c.is_finite())
            && [self.theta, self.length, self.speed, self.flight_time, self.pause].iter().all(|c| c.is_finite());
        if !finite {
            return Err("non-finite field".into());
        }
        if self.length < 0.0 || self.pause < 0.0 || self.flight_time < 0.0 || self.speed < 0.0 {
            return Err("negative length, speed, time or pause".into());
        }
        if self.length > 0.0 && self.speed <= 0.0 {
            return Err("moving segment with zero speed".into());
        }
        let lv = self.flight_time * self.speed;
        if (lv - self.length).abs() > 1e-9 * self.length.max(f64::MIN_POSITIVE) && self.length > 0.0 {
            return Err(format!("T·V = {lv} but L = {}", self.length));
        }
        if self.length == 0.0 && self.speed > 0.0 && self.flight_time > 0.0 {
            return Err("stationary segment with positive speed and flight time".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model_tag: String,
    pub seed: u64,
    pub segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x: f64,
    y: f64,
    theta: f64,
    #[serde(rename = "L")]
    length: f64,
    #[serde(rename = "V")]
    speed: f64,
    #[serde(rename = "T")]
    flight_time: f64,
    #[serde(rename = "T_p")]
    pause: f64,
}

impl Trajectory {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> Option<Point> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end(&self) -> Option<Point> {
        self.segments.last().map(Segment::end)
    }

    /// Total flight and pause time.
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Axis-aligned box `(min, max)` containing every segment.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let mut it = self.segments.iter().flat_map(|s| [s.start, s.end()]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| {
            ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
        }))
    }

    /// Checks segment invariants and exact chain closure.
    pub fn validate(&self) -> Result<(), MobilityError> {
        for (i, s) in self.segments.iter().enumerate() {
            s.check().map_err(|e| MobilityError::BrokenChain(format!("segment {i}: {e}")))?;
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            if !w[1].wrapped && w[0].end() != w[1].start {
                return Err(MobilityError::BrokenChain(format!(
                    "segment {} ends at {:?} but segment {} starts at {:?}",
                    i,
                    w[0].end(),
                    i + 1,
                    w[1].start
                )));
            }
        }
        Ok(())
    }

    /// One row per segment with columns `x, y, theta, L, V, T, T_p`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MobilityError> {
        let mut out = csv::Writer::from_writer(w);
        for s in &self.segments {
            out.serialize(CsvRow {
                x: s.start[0],
                y: s.start[1],
                theta: s.theta,
                length: s.length,
                speed: s.speed,
                flight_time: s.flight_time,
                pause: s.pause,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads segments written by [`Trajectory::write_csv`]. Wrap markers are
    /// recovered from chain discontinuities.
    pub fn read_csv<R: Read>(r: R, model_tag: &str, seed: u64) -> Result<Self, MobilityError> {
        let mut segments: Vec<Segment> = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: CsvRow = row?;
            let start = [row.x, row.y];
            let wrapped = segments.last().is_some_and(|p| p.end() != start);
            segments.push(Segment {
                start,
                theta: row.theta,
                length: row.length,
                speed: row.speed,
                flight_time: row.flight_time,
                pause: row.pause,
                wrapped,
            });
        }
        Ok(Trajectory {
            model_tag: model_tag.to_string(),
            seed,
            segments,
        })
    }

    pub fn to_json(&self) -> Result<String, MobilityError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, MobilityError> {
        let t: Trajectory = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        let cfg = ModelConfig::ModifiedRandomDirection(MrdConfig {
            waypoint_intensity: 0.0004,
            velocity: VelocitySpec::Uniform { v_min: 5.0, v_max: 15.0 },
            pause: 2.0,
            bounds: None,
        });
        generate_trajectory(&cfg, 50, [1.0, -2.0], 9).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = sample();
        assert_eq!(Trajectory::from_json(&t.to_json().unwrap()).unwrap(), t);
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,theta,L,V,T,T_p\n"));
        assert_eq!(text.lines().count(), 51);
        let back = Trajectory::read_csv(buf.as_slice(), &t.model_tag, t.seed).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn validate_catches_broken_chain() {
        let mut t = sample();
        t.segments[3].start[0] += 1e-9;
        assert!(matches!(t.validate(), Err(MobilityError::BrokenChain(_))));
    }

    #[test]
    fn bounding_box_and_timing() {
        let t = sample();
        let (lo, hi) = t.bounding_box().unwrap();
        for s in t.segments() {
            for p in [s.start, s.end()] {
                assert!(lo[0] <= p[0] && p[0] <= hi[0] && lo[1] <= p[1] && p[1] <= hi[1]);
            }
        }
        let total: f64 = t.segments().iter().map(|s| s.flight_time).sum::<f64>() + 100.0;
        assert!((t.duration() - total).abs() < 1e-9);
        let s = t.segments()[0];
        assert_eq!(s.position_at_time(s.flight_time + 1.0), s.end());
    }
}
