//! Serving-BS change detection along a trajectory by dense probing plus
//! recursive bisection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SimulationError;
use crate::geometry::{mean_cell_radius, serving_bs, AssociationPolicy, BsId, Deployment, Point};
use crate::mobility::{Segment, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandoffKind {
    /// Same tier.
    Horizontal,
    /// Across tiers.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandoffEvent {
    /// Seconds since the trajectory started.
    pub time: f64,
    pub position: Point,
    pub from: BsId,
    pub to: BsId,
    pub kind: HandoffKind,
}

impl HandoffEvent {
    fn new(time: f64, position: Point, from: BsId, to: BsId) -> Self {
        let kind = if from.tier == to.tier {
            HandoffKind::Horizontal
        } else {
            HandoffKind::Vertical
        };
        Self {
            time,
            position,
            from,
            to,
            kind,
        }
    }
}

/// Largest admissible probe step: a tenth of the mean cell radius travelled
/// at the fastest segment speed.
pub fn probe_limit(dep: &Deployment, max_speed: f64) -> f64 {
    if max_speed <= 0.0 {
        return f64::INFINITY;
    }
    mean_cell_radius(dep.total_density()) / (10.0 * max_speed)
}

/// All serving-BS changes along `traj`, in time order.
///
/// Changes are located to within `dt_probe / 100`. A segment flagged as
/// wrapped re-enters the region elsewhere; the serving BS is re-read there
/// without recording an event.
pub fn detect_handoffs(
    traj: &Trajectory,
    dep: &Deployment,
    policy: AssociationPolicy,
    dt_probe: f64,
) -> Result<Vec<HandoffEvent>, SimulationError> {
    detect_in_segments(traj.segments(), dep, policy, dt_probe, usize::MAX)
}

/// [`detect_handoffs`] over raw segments, stopping after `max_events`.
pub fn detect_in_segments(
    segments: &[Segment],
    dep: &Deployment,
    policy: AssociationPolicy,
    dt_probe: f64,
    max_events: usize,
) -> Result<Vec<HandoffEvent>, SimulationError> {
    let v_max = segments.iter().map(|s| s.speed).fold(0.0, f64::max);
    let limit = probe_limit(dep, v_max);
    if !(dt_probe > 0.0) || dt_probe > limit {
        return Err(SimulationError::ProbeTooCoarse { dt_probe, limit });
    }
    let mut d = Detector {
        dep,
        policy,
        tol: dt_probe / 100.0,
        out: Vec::new(),
    };
    let Some(first) = segments.first() else {
        return Ok(d.out);
    };
    let mut current = d.serve(first.start)?;
    let mut t0 = 0.0;
    for seg in segments {
        if seg.wrapped {
            current = d.serve(seg.start)?;
        }
        if seg.length > 0.0 && seg.flight_time > 0.0 {
            let n = (seg.flight_time / dt_probe).ceil().max(1.0) as usize;
            let h = seg.flight_time / n as f64;
            let mut ta = 0.0;
            for i in 1..=n {
                let tb = if i == n { seg.flight_time } else { i as f64 * h };
                let next = d.serve(seg.position_at_time(tb))?;
                if next != current {
                    d.refine(seg, t0, ta, tb, current, next)?;
                    current = next;
                    if d.out.len() >= max_events {
                        d.out.truncate(max_events);
                        return Ok(d.out);
                    }
                }
                ta = tb;
            }
        }
        t0 += seg.duration();
    }
    Ok(d.out)
}

struct Detector<'a> {
    dep: &'a Deployment,
    policy: AssociationPolicy,
    tol: f64,
    out: Vec<HandoffEvent>,
}

impl Detector<'_> {
    fn serve(&self, p: Point) -> Result<BsId, SimulationError> {
        Ok(serving_bs(p, self.dep, self.policy)?)
    }

    /// Locates every change in `(ta, tb]` given the serving BS at both ends.
    fn refine(&mut self, seg: &Segment, t0: f64, ta: f64, tb: f64, a: BsId, b: BsId) -> Result<(), SimulationError> {
        if tb - ta <= self.tol {
            let t = 0.5 * (ta + tb);
            self.out.push(HandoffEvent::new(t0 + t, seg.position_at_time(t), a, b));
            return Ok(());
        }
        let tm = 0.5 * (ta + tb);
        let m = self.serve(seg.position_at_time(tm))?;
        if m != a {
            self.refine(seg, t0, ta, tm, a, m)?;
        }
        if m != b {
            self.refine(seg, t0, tm, tb, m, b)?;
        }
        Ok(())
    }
}

/// Streams events as CSV with columns
/// `time, x, y, from_tier, from_index, to_tier, to_index, kind`.
pub fn write_events_csv<W: Write>(events: &[HandoffEvent], w: W) -> Result<(), SimulationError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time", "x", "y", "from_tier", "from_index", "to_tier", "to_index", "kind"])?;
    for e in events {
        let kind = match e.kind {
            HandoffKind::Horizontal => "horizontal",
            HandoffKind::Vertical => "vertical",
        };
        out.write_record([
            e.time.to_string(),
            e.position[0].to_string(),
            e.position[1].to_string(),
            e.from.tier.to_string(),
            e.from.index.to_string(),
            e.to.tier.to_string(),
            e.to.index.to_string(),
            kind.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lattice, Layout, LatticeKind, Region, Tier};

    fn line(start: Point, theta: f64, length: f64, speed: f64) -> Trajectory {
        Trajectory {
            model_tag: "test".into(),
            seed: 0,
            segments: vec![Segment {
                start,
                theta,
                length,
                speed,
                flight_time: length / speed,
                pause: 0.0,
                wrapped: false,
            }],
        }
    }

    fn square() -> Deployment {
        build_lattice(LatticeKind::Square, 50.0, Region::square(500.0), [0.0, 0.0]).unwrap()
    }

    #[test]
    fn one_orthogonal_crossing() {
        let dep = square();
        // Boundary between the BSs at x = 0 and x = 50 is x = 25.
        let traj = line([10.0, 3.0], 0.0, 30.0, 10.0);
        let ev = detect_handoffs(&traj, &dep, AssociationPolicy::NearestBs, 0.01).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].time - 1.5).abs() <= 1e-4);
        assert!((ev[0].position[0] - 25.0).abs() <= 1e-3);
        assert_eq!(ev[0].kind, HandoffKind::Horizontal);
        assert_ne!(ev[0].from, ev[0].to);
    }

    #[test]
    fn inside_one_cell() {
        let dep = square();
        let traj = line([-10.0, -10.0], 0.7, 20.0, 5.0);
        assert!(detect_handoffs(&traj, &dep, AssociationPolicy::NearestBs, 0.05).unwrap().is_empty());
    }

    #[test]
    fn clipped_corner_found_inside_one_probe() {
        // Passes next to the corner at (25, 25): two changes within one probe interval.
        let dep = square();
        let traj = line([24.0, 23.7], std::f64::consts::FRAC_PI_4, 3.0 * 2f64.sqrt(), 1.0);
        let coarse = detect_handoffs(&traj, &dep, AssociationPolicy::NearestBs, 2.8).unwrap();
        assert_eq!(coarse.len(), 2, "{coarse:?}");
    }

    #[test]
    fn rejects_coarse_probe() {
        let dep = square();
        let traj = line([0.0, 0.0], 0.0, 100.0, 10.0);
        assert!(matches!(
            detect_handoffs(&traj, &dep, AssociationPolicy::NearestBs, 1.0),
            Err(SimulationError::ProbeTooCoarse { .. })
        ));
    }

    #[test]
    fn vertical_events_are_labelled() {
        let tiers = vec![Tier::with_density(1e-4), Tier::with_density(1e-4)];
        let dep = Deployment::from_parts(
            tiers,
            vec![vec![[0.0, 0.0]], vec![[100.0, 0.0]]],
            Layout::Ppp,
            Region::square(200.0),
            0.0,
        )
        .unwrap();
        let traj = line([10.0, 0.0], 0.0, 80.0, 10.0);
        let ev = detect_handoffs(&traj, &dep, AssociationPolicy::NearestBs, 0.1).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, HandoffKind::Vertical);
        let mut buf = Vec::new();
        write_events_csv(&ev, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,x,y,from_tier,from_index,to_tier,to_index,kind\n"));
        assert!(text.trim_end().ends_with(",vertical"));
    }
}
