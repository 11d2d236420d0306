//! Bucket grid for metric-ball queries over point clouds.

use crate::heis::{dist, HPoint};

#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<HPoint>,
    lo: [f64; 3],
    cell: [f64; 3],
    dims: [usize; 3],
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl PointIndex {
    pub fn new(points: &[HPoint]) -> Self {
        let n = points.len().max(1);
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for (k, v) in [p.x, p.y, p.t].into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        if points.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let per_axis = ((n as f64).cbrt().ceil() as usize).clamp(1, 96);
        let mut dims = [1usize; 3];
        let mut cell = [1.0f64; 3];
        for k in 0..3 {
            let span = hi[k] - lo[k];
            if span > 0.0 {
                dims[k] = per_axis;
                cell[k] = span / per_axis as f64;
            }
        }
        let total = dims[0] * dims[1] * dims[2];
        let mut keyed: Vec<(usize, usize)> =
            points.iter().enumerate().map(|(i, p)| (Self::bucket_of(&lo, &cell, &dims, p), i)).collect();
        keyed.sort_unstable();
        let mut starts = vec![0usize; total + 1];
        for (b, _) in &keyed {
            starts[b + 1] += 1;
        }
        for b in 0..total {
            starts[b + 1] += starts[b];
        }
        let order = keyed.into_iter().map(|(_, i)| i).collect();
        PointIndex { points: points.to_vec(), lo, cell, dims, starts, order }
    }

    fn axis_cell(lo: f64, cell: f64, dim: usize, v: f64) -> usize {
        let c = ((v - lo) / cell).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(dim - 1)
        }
    }

    fn bucket_of(lo: &[f64; 3], cell: &[f64; 3], dims: &[usize; 3], p: &HPoint) -> usize {
        let a = Self::axis_cell(lo[0], cell[0], dims[0], p.x);
        let b = Self::axis_cell(lo[1], cell[1], dims[1], p.y);
        let c = Self::axis_cell(lo[2], cell[2], dims[2], p.t);
        (a * dims[1] + b) * dims[2] + c
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices (ascending) of points `p` with `dist(p, c) <= r`.
    pub fn ball(&self, c: HPoint, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() || !(r >= 0.0) {
            return out;
        }
        let cz = c.x.hypot(c.y);
        let tspan = r * r + 0.5 * cz * r;
        let ranges = [(c.x - r, c.x + r), (c.y - r, c.y + r), (c.t - tspan, c.t + tspan)];
        let mut lo_idx = [0usize; 3];
        let mut hi_idx = [0usize; 3];
        for k in 0..3 {
            lo_idx[k] = Self::axis_cell(self.lo[k], self.cell[k], self.dims[k], ranges[k].0);
            hi_idx[k] = Self::axis_cell(self.lo[k], self.cell[k], self.dims[k], ranges[k].1);
        }
        for a in lo_idx[0]..=hi_idx[0] {
            for b in lo_idx[1]..=hi_idx[1] {
                let base = (a * self.dims[1] + b) * self.dims[2];
                let s = self.starts[base + lo_idx[2]];
                let e = self.starts[base + hi_idx[2] + 1];
                for &i in &self.order[s..e] {
                    if dist(self.points[i], c) <= r {
                        out.push(i);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest other point (lowest index on ties), by expanding ball queries.
    pub fn nearest_other(&self, i: usize) -> Option<(usize, f64)> {
        if self.points.len() < 2 {
            return None;
        }
        let p = self.points[i];
        let mut r = self.cell.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-12);
        loop {
            let cand = self.ball(p, r);
            let best = cand
                .into_iter()
                .filter(|&j| j != i)
                .map(|j| (dist(self.points[j], p), j))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((d, j)) = best {
                return Some((j, d));
            }
            r *= 2.0;
        }
    }
}
