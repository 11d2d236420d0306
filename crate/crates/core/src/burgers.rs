//! Constant-gradient graphs via characteristics of `∂_yφ + φ∂_tφ = c`.
//!
//! Initial data `g(t) = φ(y_ref, t)` is piecewise linear. Along
//! `γ_t(s) = (y_ref + s, (c/2)s² + g(t)s + t)` the solution is `cs + g(t)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{lipschitz_constant, GridGraph, GridSpec};
use crate::heis::HPoint;
use crate::planes::{shear_coords, VerticalSubgroup};

/// Piecewise-linear function, extended linearly past the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = PiecewiseLinear { knots, values };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(d: f64) -> Self {
        PiecewiseLinear { knots: vec![0.0], values: vec![d] }
    }

    pub fn linear(slope: f64, intercept: f64) -> Self {
        PiecewiseLinear { knots: vec![-1.0, 1.0], values: vec![intercept - slope, intercept + slope] }
    }

    /// Samples `f` at `k` uniform knots on `[a, b]`.
    pub fn sample(a: f64, b: f64, k: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let knots = uniform_knots(a, b, k);
        let values = knots.iter().map(|t| f(*t)).collect();
        Self::new(knots, values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() || self.knots.len() != self.values.len() {
            return Err(Error::Config("g needs matching, non-empty knots and values".into()));
        }
        if self.knots.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::Config("g has non-finite entries".into()));
        }
        if self.knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("g knots must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Segment index for `t` (end segments absorb extrapolation).
    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        if n < 2 {
            return 0;
        }
        let k = self.knots.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(n - 2)
    }

    pub fn slope(&self, seg: usize) -> f64 {
        if self.knots.len() < 2 {
            return 0.0;
        }
        (self.values[seg + 1] - self.values[seg]) / (self.knots[seg + 1] - self.knots[seg])
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.knots.len().saturating_sub(1)).map(|k| self.slope(k)).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.knots.len() < 2 {
            return self.values[0];
        }
        let k = self.segment(t);
        self.values[k] + self.slope(k) * (t - self.knots[k])
    }

    /// Lipschitz constant of `g` (largest absolute slope).
    pub fn lipschitz(&self) -> f64 {
        self.slopes().into_iter().fold(0.0, |a, m| a.max(m.abs()))
    }

    /// Resample on new knots (exact when the new knots refine the old).
    pub fn resample(&self, knots: Vec<f64>) -> Result<Self> {
        let values = knots.iter().map(|t| self.eval(*t)).collect();
        Self::new(knots, values)
    }
}

pub fn uniform_knots(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k <= 1 {
        return vec![0.5 * (a + b)];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub y: [f64; 2],
    pub t: [f64; 2],
}

impl Domain {
    pub fn contains_box(&self, ya: f64, yb: f64, ta: f64, tb: f64) -> bool {
        let e = 1e-12;
        ya >= self.y[0] - e && yb <= self.y[1] + e && ta >= self.t[0] - e && tb <= self.t[1] + e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CGSpec {
    pub c: f64,
    pub g: PiecewiseLinear,
    pub domain: Domain,
    /// Abscissa at which `g` prescribes the data (0 in the standard form).
    #[serde(default)]
    pub y_ref: f64,
}

impl CGSpec {
    pub fn new(c: f64, g: PiecewiseLinear, domain: Domain) -> Result<Self> {
        let s = CGSpec { c, g, domain, y_ref: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.g.validate()?;
        if !self.c.is_finite() || !self.y_ref.is_finite() {
            return Err(Error::Config("c and y_ref must be finite".into()));
        }
        let d = &self.domain;
        if !(d.y[1] > d.y[0]) || !(d.t[1] > d.t[0]) {
            return Err(Error::Config("domain intervals must be non-degenerate".into()));
        }
        Ok(())
    }

    /// `τ`-coordinate of `γ_t(s)`.
    pub fn arrival(&self, t: f64, s: f64) -> f64 {
        0.5 * self.c * s * s + self.g.eval(t) * s + t
    }

    /// Value carried by `γ_t`, evaluated at parameter `s`.
    pub fn carried(&self, t: f64, s: f64) -> f64 {
        self.c * s + self.g.eval(t)
    }

    /// Foot `t` of the characteristic through `(y, τ)`; requires the
    /// arrival map to be increasing at `s = y − y_ref`.
    pub fn foot(&self, y: f64, tau: f64) -> Result<f64> {
        let s = y - self.y_ref;
        let g = &self.g;
        let n = g.knots.len();
        let base = 0.5 * self.c * s * s;
        if n < 2 {
            return Ok(tau - base - g.values[0] * s);
        }
        let images: Vec<f64> = g.knots.iter().zip(&g.values).map(|(t, v)| base + v * s + t).collect();
        for (k, m) in g.slopes().into_iter().enumerate() {
            if !(1.0 + s * m > 0.0) {
                return Err(Error::CrossingDetected { s, t1: g.knots[k], t2: g.knots[k + 1] });
            }
        }
        let k = images.partition_point(|&x| x <= tau).saturating_sub(1).min(n - 2);
        let m = g.slope(k);
        Ok(g.knots[k] + (tau - images[k]) / (1.0 + s * m))
    }

    /// `φ(y, τ)` of the CG solution.
    pub fn eval(&self, y: f64, tau: f64) -> Result<f64> {
        let t = self.foot(y, tau)?;
        Ok(self.carried(t, y - self.y_ref))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    pub t: f64,
    /// Coefficients of `s ↦ a2·s² + a1·s + a0`.
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub s: f64,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFan {
    pub curves: Vec<Characteristic>,
    /// Earliest `|s|` at which adjacent characteristics meet.
    pub crossing: Option<Crossing>,
}

/// Characteristics from `per_segment` feet per knot interval (plus knots).
pub fn characteristic_fan(spec: &CGSpec, per_segment: usize) -> CharacteristicFan {
    let g = &spec.g;
    let mut feet = Vec::new();
    if g.knots.len() < 2 {
        feet.push(g.knots[0]);
    } else {
        for w in g.knots.windows(2) {
            for k in 0..per_segment.max(1) {
                feet.push(w[0] + (w[1] - w[0]) * k as f64 / per_segment.max(1) as f64);
            }
        }
        feet.push(*g.knots.last().unwrap());
    }
    let curves: Vec<Characteristic> =
        feet.iter().map(|&t| Characteristic { t, a2: 0.5 * spec.c, a1: g.eval(t), a0: t }).collect();
    let mut crossing: Option<Crossing> = None;
    for w in curves.windows(2) {
        let dg = w[1].a1 - w[0].a1;
        if dg == 0.0 {
            continue;
        }
        let s = -(w[1].a0 - w[0].a0) / dg;
        if crossing.map_or(true, |c| s.abs() < c.s.abs()) {
            crossing = Some(Crossing { s, t1: w[0].t, t2: w[1].t });
        }
    }
    CharacteristicFan { curves, crossing }
}

/// Checks that no characteristics meet for `s` between 0 and the given
/// abscissae: exact per-segment test plus an arrival-order sort per slice.
pub fn check_no_crossing(spec: &CGSpec, ys: &[f64]) -> Result<()> {
    let (mut s_lo, mut s_hi) = (0.0f64, 0.0f64);
    for y in ys {
        s_lo = s_lo.min(y - spec.y_ref);
        s_hi = s_hi.max(y - spec.y_ref);
    }
    let g = &spec.g;
    let mut earliest: Option<Crossing> = None;
    for (k, m) in g.slopes().into_iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let s = -1.0 / m;
        if s >= s_lo && s <= s_hi && earliest.map_or(true, |c| s.abs() < c.s.abs()) {
            earliest = Some(Crossing { s, t1: g.knots[k], t2: g.knots[k + 1] });
        }
    }
    if let Some(c) = earliest {
        return Err(Error::CrossingDetected { s: c.s, t1: c.t1, t2: c.t2 });
    }
    let fan = characteristic_fan(spec, 4);
    for y in ys {
        let s = y - spec.y_ref;
        for w in fan.curves.windows(2) {
            let a = spec.arrival(w[0].t, s);
            let b = spec.arrival(w[1].t, s);
            if !(b > a) {
                return Err(Error::CrossingDetected { s, t1: w[0].t, t2: w[1].t });
            }
        }
    }
    Ok(())
}

/// φ on `grid` by inverting the characteristic map per node.
pub fn solve_cg(spec: &CGSpec, grid: GridSpec) -> Result<GridGraph> {
    spec.validate()?;
    grid.validate()?;
    let ys: Vec<f64> = (0..grid.ny).map(|i| grid.y(i)).chain(spec.domain.y).collect();
    check_no_crossing(spec, &ys)?;
    let phi = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.node(k);
            spec.eval(grid.y(i), grid.t(j))
        })
        .collect::<Result<Vec<f64>>>()?;
    GridGraph::from_values(grid, phi)
}

/// Largest `|φ − cs − g(t)|` over grid nodes, where `t = τ + (c/2)s² − φs`
/// is the foot of the characteristic that carries the node value `φ` to
/// `(y, τ)`. Zero up to rounding exactly when every node lies on its own
/// characteristic.
pub fn verify_along_characteristics(g: &GridGraph, spec: &CGSpec) -> f64 {
    let grid = g.grid;
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.node(k);
            let s = grid.y(i) - spec.y_ref;
            let phi = g.phi[k];
            let t = grid.t(j) + 0.5 * spec.c * s * s - phi * s;
            (phi - spec.carried(t, s)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub c: f64,
    pub d: f64,
    pub residual: f64,
    pub gradient_spread: f64,
}

/// Minimax fit `φ ≈ cy + d` for graphs whose sampled gradient is constant
/// up to `tol`.
pub fn entire_cg_plane_fit(g: &GridGraph, tol: f64) -> Result<PlaneFit> {
    let grad = crate::graphs::intrinsic_gradient(g)?;
    let (gmin, gmax) = grad.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = gmax - gmin;
    if spread > tol {
        return Err(Error::NotConstantGradient { spread, tol });
    }
    let grid = g.grid;
    let spread_for = |c: f64| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..grid.len() {
            let r = g.phi[k] - c * grid.y(grid.node(k).0);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    };
    let cost = |c: f64| {
        let (lo, hi) = spread_for(c);
        0.5 * (hi - lo)
    };
    let c0 = 0.5 * (gmin + gmax);
    let (pmin, pmax) = g.phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let yr = grid.y_max() - grid.y0;
    let c = if grid.ny < 2 || yr <= 0.0 {
        c0
    } else {
        let k = c0.abs() + 2.0 * (pmax - pmin) / yr + 1.0;
        golden_min(cost, -k, k, 300)
    };
    let (lo, hi) = spread_for(c);
    Ok(PlaneFit { c, d: 0.5 * (lo + hi), residual: 0.5 * (hi - lo), gradient_spread: spread })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
        if b - a <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Bounding box `(y_lo, y_hi, t_lo, t_hi)` of `π_W(B(center, rho))`.
pub fn projected_ball_bbox(center: HPoint, rho: f64) -> (f64, f64, f64, f64) {
    let w = VerticalSubgroup::yt();
    let tr = 1.25 * rho * rho;
    let corners = [(-rho, -tr), (-rho, tr), (rho, -tr), (rho, tr)].map(|(v, t)| shear_coords(center, v, t, w));
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (y, t) in corners {
        b = (b.0.min(y), b.1.max(y), b.2.min(t), b.3.max(t));
    }
    b
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub graph: GridGraph,
    pub lipschitz: f64,
}

/// A CG candidate on `π_W(B(center, b·radius))`, rejected when its sampled
/// Lipschitz constant exceeds `l_bound`.
pub fn make_admissible(
    spec: &CGSpec,
    center: HPoint,
    radius: f64,
    b: f64,
    l_bound: f64,
    resolution: usize,
) -> Result<Candidate> {
    let (ya, yb, ta, tb) = projected_ball_bbox(center, b * radius);
    if !spec.domain.contains_box(ya, yb, ta, tb) {
        return Err(Error::Coverage { uncovered: 1, total: 1 });
    }
    let n = resolution.max(3);
    let grid = GridSpec::spanning(ya, yb, ta, tb, n, n)?;
    let graph = solve_cg(spec, grid)?;
    let lipschitz = lipschitz_constant(&graph.to_point_set());
    if lipschitz > l_bound {
        return Err(Error::LipschitzExceeded { estimate: lipschitz, bound: l_bound });
    }
    Ok(Candidate { graph, lipschitz })
}

/// Functions used by the scenarios and tests.
pub mod library {
    /// Non-affine solution of `∇^φφ = 0` on `y > −1`.
    pub fn t_over_y_plus_one(y: f64, t: f64) -> f64 {
        t / (y + 1.0)
    }

    /// Piecewise solution of `∇^φφ = 0` on `(−1, 1)²`, not C¹ across `t = 0`.
    pub fn ex_function(y: f64, t: f64) -> f64 {
        if t >= 0.0 {
            t / (y + 1.0)
        } else {
            t / (y - 1.0)
        }
    }

    pub fn abs_y(y: f64, _t: f64) -> f64 {
        y.abs()
    }

    pub fn perturbed(y: f64, _t: f64) -> f64 {
        0.5 * y + 0.05 * (4.0 * y).sin()
    }
}
