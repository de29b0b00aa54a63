//! Uniform-grid bucket index for nearest-point queries on one tier.

use super::Point;

#[derive(Debug, Clone, Default)]
pub(crate) struct GridIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    /// CSR layout: points of cell `c` are `order[starts[c]..starts[c + 1]]`.
    starts: Vec<u32>,
    order: Vec<u32>,
}

impl GridIndex {
    /// Builds an index with roughly `per_cell` points per bucket.
    pub(crate) fn build(points: &[Point], per_cell: f64) -> Self {
        if points.is_empty() {
            return Self::default();
        }
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p[0]);
            y0 = y0.min(p[1]);
            x1 = x1.max(p[0]);
            y1 = y1.max(p[1]);
        }
        let w = (x1 - x0).max(1e-9);
        let h = (y1 - y0).max(1e-9);
        let density = points.len() as f64 / (w * h);
        let mut cell = (per_cell / density).sqrt();
        if !cell.is_finite() || cell <= 0.0 {
            cell = w.max(h);
        }
        // Keep the bucket count bounded for degenerate (collinear) inputs.
        let max_side = 4096.0;
        cell = cell.max(w / max_side).max(h / max_side);
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);

        let mut counts = vec![0u32; nx * ny + 1];
        let cell_of = |p: &Point| -> usize {
            let cx = (((p[0] - x0) / cell) as usize).min(nx - 1);
            let cy = (((p[1] - y0) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut order = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = cell_of(p);
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Self {
            origin: [x0, y0],
            cell,
            nx,
            ny,
            starts: counts,
            order,
        }
    }

    /// Index and squared distance of the point nearest to `q`; exact ties go
    /// to the lowest index.
    pub(crate) fn nearest(&self, points: &[Point], q: Point) -> Option<(usize, f64)> {
        if points.is_empty() {
            return None;
        }
        let fx = (q[0] - self.origin[0]) / self.cell;
        let fy = (q[1] - self.origin[1]) / self.cell;
        let cx = (fx.floor().max(0.0) as usize).min(self.nx - 1) as isize;
        let cy = (fy.floor().max(0.0) as usize).min(self.ny - 1) as isize;
        let (nx, ny) = (self.nx as isize, self.ny as isize);

        let mut best: Option<(usize, f64)> = None;
        let mut ring: isize = 0;
        loop {
            let mut visit = |ix: isize, iy: isize| {
                if ix < 0 || iy < 0 || ix >= nx || iy >= ny {
                    return;
                }
                let c = (iy * nx + ix) as usize;
                let (s, e) = (self.starts[c] as usize, self.starts[c + 1] as usize);
                for &i in &self.order[s..e] {
                    let i = i as usize;
                    let p = points[i];
                    let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                    best = match best {
                        Some((bi, bd)) if bd < d2 || (bd == d2 && bi < i) => Some((bi, bd)),
                        _ => Some((i, d2)),
                    };
                }
            };
            if ring == 0 {
                visit(cx, cy);
            } else {
                for ix in (cx - ring)..=(cx + ring) {
                    visit(ix, cy - ring);
                    visit(ix, cy + ring);
                }
                for iy in (cy - ring + 1)..=(cy + ring - 1) {
                    visit(cx - ring, iy);
                    visit(cx + ring, iy);
                }
            }
            let covered_all = cx - ring <= 0 && cy - ring <= 0 && cx + ring >= nx - 1 && cy + ring >= ny - 1;
            if covered_all {
                break;
            }
            if let Some((_, bd)) = best {
                // Everything not yet visited lies outside the block of cells
                // within Chebyshev distance `ring` of the start cell.
                let bx0 = self.origin[0] + (cx - ring) as f64 * self.cell;
                let bx1 = self.origin[0] + (cx + ring + 1) as f64 * self.cell;
                let by0 = self.origin[1] + (cy - ring) as f64 * self.cell;
                let by1 = self.origin[1] + (cy + ring + 1) as f64 * self.cell;
                let inside = q[0] >= bx0 && q[0] <= bx1 && q[1] >= by0 && q[1] <= by1;
                if inside {
                    let margin = (q[0] - bx0).min(bx1 - q[0]).min(q[1] - by0).min(by1 - q[1]);
                    if margin * margin > bd {
                        break;
                    }
                }
            }
            ring += 1;
        }
        best
    }
}
