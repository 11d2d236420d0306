//! Intrinsic graphs over `W_{y,t}` sampled on rectangular grids.
//!
//! A node `(y, t)` of the grid is the point `w = (0, y, t)` of `W_{y,t}` and
//! carries the value `φ(w)`; the graph point is `w·(φ(w), 0, 0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{dist, HPoint};
use crate::planes::{shear_coords, split, VerticalSubgroup};
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub y0: f64,
    pub t0: f64,
    pub dy: f64,
    pub dt: f64,
    pub ny: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(y0: f64, t0: f64, dy: f64, dt: f64, ny: usize, nt: usize) -> Result<Self> {
        let g = GridSpec { y0, t0, dy, dt, ny, nt };
        g.validate()?;
        Ok(g)
    }

    /// `ny × nt` nodes spanning `[ya, yb] × [ta, tb]` inclusive.
    pub fn spanning(ya: f64, yb: f64, ta: f64, tb: f64, ny: usize, nt: usize) -> Result<Self> {
        if ny < 2 || nt < 2 || !(yb > ya) || !(tb > ta) {
            return Err(Error::InvalidGrid(format!("cannot span [{ya},{yb}]x[{ta},{tb}] with {ny}x{nt} nodes")));
        }
        Self::new(ya, ta, (yb - ya) / (ny - 1) as f64, (tb - ta) / (nt - 1) as f64, ny, nt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ny == 0 || self.nt == 0 {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if !(self.dy > 0.0 && self.dt > 0.0) || !self.dy.is_finite() || !self.dt.is_finite() {
            return Err(Error::InvalidGrid(format!("steps must be positive, got dy={} dt={}", self.dy, self.dt)));
        }
        if !self.y0.is_finite() || !self.t0.is_finite() {
            return Err(Error::InvalidGrid("non-finite origin".into()));
        }
        Ok(())
    }

    pub fn y(&self, i: usize) -> f64 {
        self.y0 + i as f64 * self.dy
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.nt - 1)
    }

    pub fn len(&self) -> usize {
        self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nt + j
    }

    pub fn node(&self, k: usize) -> (usize, usize) {
        (k / self.nt, k % self.nt)
    }

    pub fn cell_area(&self) -> f64 {
        self.dy * self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridGraph {
    pub grid: GridSpec,
    /// Row-major values, `phi[i * nt + j] = φ(y_i, t_j)`.
    pub phi: Vec<f64>,
    pub mass: Vec<f64>,
}

impl GridGraph {
    /// Builds a graph from values; mass is `Δy·Δt·√(1 + (∇^φφ)²)` per node.
    pub fn from_values(grid: GridSpec, phi: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if phi.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for {} nodes", phi.len(), grid.len())));
        }
        if let Some(k) = phi.iter().position(|v| !v.is_finite()) {
            let (i, j) = grid.node(k);
            return Err(Error::InvalidGrid(format!("non-finite value at node ({i}, {j})")));
        }
        let mass = if grid.ny >= 3 && grid.nt >= 3 {
            let g = gradient_of(&grid, &phi);
            g.iter().map(|d| grid.cell_area() * (1.0 + d * d).sqrt()).collect()
        } else {
            vec![grid.cell_area(); grid.len()]
        };
        Ok(GridGraph { grid, phi, mass })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        let phi = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.node(k);
                f(grid.y(i), grid.t(j))
            })
            .collect();
        Self::from_values(grid, phi)
    }

    pub fn with_mass(grid: GridSpec, phi: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if phi.len() != grid.len() || mass.len() != grid.len() {
            return Err(Error::InvalidGrid("array sizes do not match the grid".into()));
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite value".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidGrid("mass must be finite and non-negative".into()));
        }
        Ok(GridGraph { grid, phi, mass })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.phi[self.grid.index(i, j)]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().fold(0.0, |a, m| a + m)
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.grid.ny || j >= self.grid.nt {
            return Err(Error::IndexOutOfRange { i, j, ny: self.grid.ny, nt: self.grid.nt });
        }
        Ok(())
    }

    /// `w·(φ(w), 0, 0)` for the node `w = (0, y_i, t_j)`.
    pub fn graph_map(&self, i: usize, j: usize) -> Result<HPoint> {
        self.check(i, j)?;
        Ok(self.point(i, j))
    }

    pub(crate) fn point(&self, i: usize, j: usize) -> HPoint {
        graph_point(self.grid.y(i), self.grid.t(j), self.value(i, j))
    }

    /// Bilinear interpolation; `None` outside the grid rectangle.
    pub fn interpolate(&self, y: f64, t: f64) -> Option<f64> {
        let g = &self.grid;
        let fy = (y - g.y0) / g.dy;
        let ft = (t - g.t0) / g.dt;
        let slack = 1e-9;
        if !(fy >= -slack && ft >= -slack) || fy > (g.ny - 1) as f64 + slack || ft > (g.nt - 1) as f64 + slack {
            return None;
        }
        let (i0, wy) = cell_coord(fy, g.ny);
        let (j0, wt) = cell_coord(ft, g.nt);
        let i1 = (i0 + 1).min(g.ny - 1);
        let j1 = (j0 + 1).min(g.nt - 1);
        let v00 = self.value(i0, j0);
        let v01 = self.value(i0, j1);
        let v10 = self.value(i1, j0);
        let v11 = self.value(i1, j1);
        Some((1.0 - wy) * ((1.0 - wt) * v00 + wt * v01) + wy * ((1.0 - wt) * v10 + wt * v11))
    }

    /// Bound on the bilinear interpolation error from second differences.
    pub fn interpolation_error_bound(&self) -> f64 {
        let g = &self.grid;
        let mut syy = 0.0f64;
        let mut stt = 0.0f64;
        let mut syt = 0.0f64;
        for i in 0..g.ny {
            for j in 0..g.nt {
                if i >= 1 && i + 1 < g.ny {
                    syy = syy.max((self.value(i + 1, j) - 2.0 * self.value(i, j) + self.value(i - 1, j)).abs());
                }
                if j >= 1 && j + 1 < g.nt {
                    stt = stt.max((self.value(i, j + 1) - 2.0 * self.value(i, j) + self.value(i, j - 1)).abs());
                }
                if i + 1 < g.ny && j + 1 < g.nt {
                    let m = self.value(i + 1, j + 1) - self.value(i + 1, j) - self.value(i, j + 1) + self.value(i, j);
                    syt = syt.max(m.abs());
                }
            }
        }
        (syy + stt) / 8.0 + syt / 4.0
    }

    pub fn to_point_set(&self) -> GraphPointSet {
        let points = (0..self.grid.len())
            .map(|k| {
                let (i, j) = self.grid.node(k);
                self.point(i, j)
            })
            .collect();
        GraphPointSet { points, mass: self.mass.clone(), provenance: "grid graph".into() }
    }

    /// Node indices whose graph point lies in `B(center, r)`.
    pub fn nodes_in_ball(&self, center: HPoint, r: f64) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&k| {
                let (i, j) = self.grid.node(k);
                dist(self.point(i, j), center) <= r
            })
            .collect()
    }
}

fn cell_coord(f: f64, n: usize) -> (usize, f64) {
    if n == 1 {
        return (0, 0.0);
    }
    let mut f = f.clamp(0.0, (n - 1) as f64);
    // snap to nodes so that sampling at a node returns its stored value
    if (f - f.round()).abs() < 1e-9 {
        f = f.round();
    }
    let i = (f.floor() as usize).min(n - 2);
    (i, f - i as f64)
}

/// `(0, y, t)·(φ, 0, 0)`.
pub fn graph_point(y: f64, t: f64, phi: f64) -> HPoint {
    HPoint::new(phi, y, t - 0.5 * y * phi)
}

/// Weighted sample of a set in H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPointSet {
    pub points: Vec<HPoint>,
    pub mass: Vec<f64>,
    pub provenance: String,
}

impl GraphPointSet {
    pub fn new(points: Vec<HPoint>, mass: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if points.len() != mass.len() {
            return Err(Error::InvalidGrid(format!("{} points but {} masses", points.len(), mass.len())));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid("non-finite point".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidGrid("mass must be finite and non-negative".into()));
        }
        Ok(GraphPointSet { points, mass, provenance: provenance.into() })
    }

    /// Unit masses.
    pub fn uniform(points: Vec<HPoint>, provenance: impl Into<String>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n], provenance)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().fold(0.0, |a, m| a + m)
    }

    pub fn mass_of(&self, idx: &[usize]) -> f64 {
        idx.iter().fold(0.0, |a, &i| a + self.mass[i])
    }

    pub fn subset(&self, idx: &[usize]) -> GraphPointSet {
        GraphPointSet {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            mass: idx.iter().map(|&i| self.mass[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn left_translate(&self, g: HPoint) -> GraphPointSet {
        GraphPointSet {
            points: self.points.iter().map(|p| g * *p).collect(),
            mass: self.mass.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// `δ_r` on points; masses scale by `r³`.
    pub fn dilate(&self, r: f64) -> Result<GraphPointSet> {
        let points = self.points.iter().map(|p| crate::heis::dilate(r, *p)).collect::<Result<Vec<_>>>()?;
        Ok(GraphPointSet {
            points,
            mass: self.mass.iter().map(|m| m * r * r * r).collect(),
            provenance: self.provenance.clone(),
        })
    }

    pub fn concat(&self, other: &GraphPointSet) -> GraphPointSet {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut mass = self.mass.clone();
        mass.extend_from_slice(&other.mass);
        GraphPointSet { points, mass, provenance: format!("{} + {}", self.provenance, other.provenance) }
    }
}

/// `‖p_V‖ / ‖p_W‖` for `p = x⁻¹·y`; infinite when `p` lies in `V` but not at
/// the identity, `None` when the two points coincide.
pub fn cone_ratio(x: HPoint, y: HPoint, w: VerticalSubgroup) -> Option<f64> {
    let p = x.inv() * y;
    let (pw, pv) = split(p, w);
    let nv = pv.norm();
    let scale = x.max_abs().max(y.max_abs()).max(1.0);
    let tol = Tolerance::DEFAULT;
    let w_vanishes = pw.x.hypot(pw.y) <= tol.slack(scale) && pw.t.abs() <= tol.slack(scale * scale);
    if w_vanishes {
        if nv <= tol.slack(scale) {
            None
        } else {
            Some(f64::INFINITY)
        }
    } else {
        Some(nv / pw.norm())
    }
}

/// Smallest `L̂` such that every ordered pair avoids the cones of aperture
/// `α < 1/L̂`; `∞` when two samples share their `π_W` projection.
pub fn lipschitz_constant(s: &GraphPointSet) -> f64 {
    lipschitz_constant_wrt(&s.points, VerticalSubgroup::yt())
}

pub fn lipschitz_constant_wrt(points: &[HPoint], w: VerticalSubgroup) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for (j, q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(r) = cone_ratio(points[i], *q, w) {
                    best = best.max(r);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Derivative along one axis: 4th-order stencils when `n >= 5`, else 2nd.
fn derivative(n: usize, h: f64, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 3 {
        let d = (f(1) - f(0)) / h;
        return vec![d, d];
    }
    if n < 5 {
        out[0] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
        for k in 1..n - 1 {
            out[k] = (f(k + 1) - f(k - 1)) / (2.0 * h);
        }
        out[n - 1] = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
        return out;
    }
    let h12 = 12.0 * h;
    out[0] = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / h12;
    out[1] = (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / h12;
    for k in 2..n - 2 {
        out[k] = (f(k - 2) - 8.0 * f(k - 1) + 8.0 * f(k + 1) - f(k + 2)) / h12;
    }
    let m = n - 1;
    out[m - 1] = (3.0 * f(m) + 10.0 * f(m - 1) - 18.0 * f(m - 2) + 6.0 * f(m - 3) - f(m - 4)) / h12;
    out[m] = (25.0 * f(m) - 48.0 * f(m - 1) + 36.0 * f(m - 2) - 16.0 * f(m - 3) + 3.0 * f(m - 4)) / h12;
    out
}

fn gradient_of(grid: &GridSpec, phi: &[f64]) -> Vec<f64> {
    let (ny, nt) = (grid.ny, grid.nt);
    let mut dy = vec![0.0; grid.len()];
    let mut dtv = vec![0.0; grid.len()];
    for j in 0..nt {
        let col = derivative(ny, grid.dy, |i| phi[i * nt + j]);
        for i in 0..ny {
            dy[i * nt + j] = col[i];
        }
    }
    for i in 0..ny {
        let row = derivative(nt, grid.dt, |j| phi[i * nt + j]);
        dtv[i * nt..(i + 1) * nt].copy_from_slice(&row);
    }
    (0..grid.len()).map(|k| dy[k] + phi[k] * dtv[k]).collect()
}

/// `∇^φφ = ∂_yφ + φ∂_tφ` at every node (row-major).
pub fn intrinsic_gradient(g: &GridGraph) -> Result<Vec<f64>> {
    if g.grid.ny < 3 || g.grid.nt < 3 {
        return Err(Error::InvalidGrid("intrinsic gradient needs at least 3x3 nodes".into()));
    }
    Ok(gradient_of(&g.grid, &g.phi))
}

/// `(φ(y+h, t+φh) − φ(y,t))/h` with `h = Δy`; NaN where the shifted point
/// leaves the grid.
pub fn difference_quotient_gradient(g: &GridGraph) -> Vec<f64> {
    let grid = g.grid;
    let h = grid.dy;
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.node(k);
            let v = g.phi[k];
            g.interpolate(grid.y(i) + h, grid.t(j) + v * h).map(|u| (u - v) / h).unwrap_or(f64::NAN)
        })
        .collect()
}

pub fn graph_distance(g: &GridGraph, a: (usize, usize), b: (usize, usize)) -> Result<f64> {
    Ok(dist(g.graph_map(a.0, a.1)?, g.graph_map(b.0, b.1)?))
}

/// Result of re-expressing a translated graph on a new grid.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub graph: GridGraph,
    /// Bound on the bilinear interpolation error of the source.
    pub interpolation_error: f64,
}

/// `φ_q(w) = π_V(q)·φ(P_{q⁻¹}(w))` sampled on `target`.
pub fn translate_graph(g: &GridGraph, q: HPoint, target: GridSpec) -> Result<Resampled> {
    target.validate()?;
    let w = VerticalSubgroup::yt();
    let qi = q.inv();
    let vals: Vec<Option<f64>> = (0..target.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = target.node(k);
            let (ys, ts) = shear_coords(qi, target.y(i), target.t(j), w);
            g.interpolate(ys, ts).map(|v| q.x + v)
        })
        .collect();
    let uncovered = vals.iter().filter(|v| v.is_none()).count();
    if uncovered > 0 {
        return Err(Error::Coverage { uncovered, total: target.len() });
    }
    let phi = vals.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    Ok(Resampled { graph: GridGraph::from_values(target, phi)?, interpolation_error: g.interpolation_error_bound() })
}

/// Largest full-width grid inside the image of `g`'s domain under `P_q`.
pub fn inscribed_target(g: &GridGraph, q: HPoint, ny: usize, nt: usize) -> Result<GridSpec> {
    let w = VerticalSubgroup::yt();
    let (ya, yb) = (g.grid.y0, g.grid.y_max());
    let (ta, tb) = (g.grid.t0, g.grid.t_max());
    let c = |y: f64, t: f64| shear_coords(q, y, t, w);
    let lo = c(ya, ta).1.max(c(yb, ta).1);
    let hi = c(ya, tb).1.min(c(yb, tb).1);
    if !(hi > lo) {
        return Err(Error::Coverage { uncovered: ny * nt, total: ny * nt });
    }
    let (y_lo, y_hi) = (c(ya, ta).0, c(yb, ta).0);
    // pull the boundary in slightly so rounding never drops a node
    let ey = 1e-9 * (y_hi - y_lo);
    let et = 1e-9 * (hi - lo);
    GridSpec::spanning(y_lo + ey, y_hi - ey, lo + et, hi - et, ny, nt)
}

/// `φ_r(w) = δ_r(φ(δ_{1/r} w))`; exact on the scaled grid.
pub fn dilate_graph(g: &GridGraph, r: f64) -> Result<GridGraph> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveScale(r));
    }
    let s = g.grid;
    let grid = GridSpec::new(r * s.y0, r * r * s.t0, r * s.dy, r * r * s.dt, s.ny, s.nt)?;
    let phi = g.phi.iter().map(|v| r * v).collect();
    let mass = g.mass.iter().map(|m| m * r * r * r).collect();
    GridGraph::with_mass(grid, phi, mass)
}

/// `min_a ‖x⁻¹·w·(a,0,0)‖`: the distance from `x` to the fibre `w·V` over
/// `W_{y,t}`.
pub fn fiber_distance(x: HPoint, w: HPoint) -> f64 {
    let p = x.inv() * w;
    let (xx, yy, tt) = (p.x, p.y, p.t);
    let h = |a: f64| ((xx + a) * (xx + a) + yy * yy).max((tt - 0.5 * yy * a).abs());
    let mut cands = vec![-xx];
    if yy != 0.0 {
        cands.push(2.0 * tt / yy);
    }
    for sign in [1.0, -1.0] {
        // (X+a)² + Y² = ±(T − Ya/2)
        let b = 2.0 * xx + sign * 0.5 * yy;
        let c = xx * xx + yy * yy - sign * tt;
        let disc = b * b - 4.0 * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            cands.push(0.5 * (-b + sq));
            cands.push(0.5 * (-b - sq));
        }
    }
    cands.into_iter().map(h).fold(f64::INFINITY, f64::min).sqrt()
}

/// Largest `b` for which `π_W(B(x, b·r)) ⊆ π_W(B(x, r) ∩ Γ)` on the nodes of
/// `g`; `None` if every node already lies in the ball.
pub fn ball_inclusion_constant(g: &GridGraph, x: HPoint, r: f64) -> Option<f64> {
    (0..g.grid.len())
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = g.grid.node(k);
            let p = g.point(i, j);
            if dist(p, x) > r {
                Some(fiber_distance(x, HPoint::new(0.0, g.grid.y(i), g.grid.t(j))) / r)
            } else {
                None
            }
        })
        .min_by(|a, b| a.total_cmp(b))
}

/// `b_L` calibrated over a family of balls.
pub fn calibrate_b(g: &GridGraph, balls: &[(HPoint, f64)]) -> Option<f64> {
    balls.iter().filter_map(|(x, r)| ball_inclusion_constant(g, *x, *r)).min_by(|a, b| a.total_cmp(b))
}
