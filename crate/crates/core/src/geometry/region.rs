use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GeometryError, Point};

/// Origin-centred simulation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Rectangle { width: f64, height: f64 },
    Disk { radius: f64 },
}

impl Region {
    pub fn square(side: f64) -> Self {
        Region::Rectangle {
            width: side,
            height: side,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = match *self {
            Region::Rectangle { width, height } => {
                width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0
            }
            Region::Disk { radius } => radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidRegion(format!("{self:?}")))
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rectangle { width, height } => width * height,
            Region::Disk { radius } => PI * radius * radius,
        }
    }

    /// Smallest width of the region (side or diameter).
    pub fn extent(&self) -> f64 {
        match *self {
            Region::Rectangle { width, height } => width.min(height),
            Region::Disk { radius } => 2.0 * radius,
        }
    }

    /// Half-widths of the axis-aligned bounding box.
    pub fn half_extents(&self) -> (f64, f64) {
        match *self {
            Region::Rectangle { width, height } => (0.5 * width, 0.5 * height),
            Region::Disk { radius } => (radius, radius),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Rectangle { width, height } => {
                p[0].abs() <= 0.5 * width && p[1].abs() <= 0.5 * height
            }
            Region::Disk { radius } => p[0] * p[0] + p[1] * p[1] <= radius * radius,
        }
    }

    /// Region grown outward by `margin` on every side.
    pub fn dilate(&self, margin: f64) -> Region {
        match *self {
            Region::Rectangle { width, height } => Region::Rectangle {
                width: width + 2.0 * margin,
                height: height + 2.0 * margin,
            },
            Region::Disk { radius } => Region::Disk {
                radius: radius + margin,
            },
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Region::Rectangle { width, height } => [
                (rng.random::<f64>() - 0.5) * width,
                (rng.random::<f64>() - 0.5) * height,
            ],
            Region::Disk { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let phi = 2.0 * PI * rng.random::<f64>();
                [r * phi.cos(), r * phi.sin()]
            }
        }
    }

    /// Distance travelled from `p` (inside) along unit direction `dir` before
    /// leaving the region, together with the outward unit normal at the exit.
    pub fn exit_along(&self, p: Point, dir: Point) -> (f64, Point) {
        match *self {
            Region::Rectangle { width, height } => {
                let (hx, hy) = (0.5 * width, 0.5 * height);
                let tx = if dir[0] > 0.0 {
                    (hx - p[0]) / dir[0]
                } else if dir[0] < 0.0 {
                    (-hx - p[0]) / dir[0]
                } else {
                    f64::INFINITY
                };
                let ty = if dir[1] > 0.0 {
                    (hy - p[1]) / dir[1]
                } else if dir[1] < 0.0 {
                    (-hy - p[1]) / dir[1]
                } else {
                    f64::INFINITY
                };
                if tx <= ty {
                    (tx.max(0.0), [dir[0].signum(), 0.0])
                } else {
                    (ty.max(0.0), [0.0, dir[1].signum()])
                }
            }
            Region::Disk { radius } => {
                // |p + t d|² = a²  ⇒  t² + 2 (p·d) t + |p|² − a² = 0
                let b = p[0] * dir[0] + p[1] * dir[1];
                let c = p[0] * p[0] + p[1] * p[1] - radius * radius;
                let t = (-b + (b * b - c).max(0.0).sqrt()).max(0.0);
                let q = [p[0] + t * dir[0], p[1] + t * dir[1]];
                let n = (q[0] * q[0] + q[1] * q[1]).sqrt().max(f64::MIN_POSITIVE);
                (t, [q[0] / n, q[1] / n])
            }
        }
    }
}
