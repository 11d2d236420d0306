//! Vertical β-numbers, β_CG upper bounds, thin-boundary radii and the
//! gradient-fluctuation probe.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::burgers::{uniform_knots, CGSpec, Domain, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::graphs::{graph_point, intrinsic_gradient, lipschitz_constant, GraphPointSet, GridGraph};
use crate::heis::{dist, HPoint};
use crate::hull::min_width_strip;
use crate::optim::nelder_mead;
use crate::planes::{dist_to_plane, project_w, VerticalPlane, VerticalSubgroup};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: HPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: HPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, p: HPoint) -> bool {
        dist(p, self.center) <= self.radius
    }

    pub fn members(&self, points: &[HPoint]) -> Vec<usize> {
        (0..points.len()).filter(|&i| self.contains(points[i])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaMethod {
    Calipers,
    Brute,
}

impl BetaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BetaMethod::Calipers => "calipers",
            BetaMethod::Brute => "brute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRecord {
    pub ball: Ball,
    pub beta: f64,
    pub best_plane: VerticalPlane,
    pub method: BetaMethod,
}

/// `sup_{y ∈ S∩B} dist(y, plane) / r`.
pub fn beta_for_plane(points: &[HPoint], ball: &Ball, plane: &VerticalPlane) -> f64 {
    points.iter().filter(|p| ball.contains(**p)).map(|p| dist_to_plane(*p, plane)).fold(0.0, f64::max) / ball.radius
}

fn plane_from_normal(n: [f64; 2], mid: f64) -> VerticalPlane {
    let w = VerticalSubgroup::new(n[0].atan2(-n[1]));
    let nt = w.normal();
    let sign = if nt[0] * n[0] + nt[1] * n[1] >= 0.0 { 1.0 } else { -1.0 };
    VerticalPlane::new(w, sign * mid)
}

/// Exact β over all vertical planes for the samples with the given indices.
pub fn beta_of_members(points: &[HPoint], members: &[usize], ball: &Ball) -> Result<BetaRecord> {
    let hz: Vec<[f64; 2]> = members.iter().map(|&i| points[i].horizontal()).collect();
    let strip = min_width_strip(&hz).ok_or(Error::Undefined)?;
    Ok(BetaRecord {
        ball: *ball,
        beta: 0.5 * strip.width() / ball.radius,
        best_plane: plane_from_normal(strip.normal, 0.5 * (strip.lo + strip.hi)),
        method: BetaMethod::Calipers,
    })
}

pub fn beta_vertical(points: &[HPoint], ball: &Ball) -> Result<BetaRecord> {
    beta_of_members(points, &ball.members(points), ball)
}

/// β over `n_dirs` equally spaced plane directions (upper bound on the exact
/// value).
pub fn beta_vertical_brute(points: &[HPoint], ball: &Ball, n_dirs: usize) -> Result<BetaRecord> {
    let inside: Vec<HPoint> = points.iter().copied().filter(|p| ball.contains(*p)).collect();
    if inside.is_empty() {
        return Err(Error::Undefined);
    }
    let mut best: Option<(f64, VerticalPlane)> = None;
    for k in 0..n_dirs.max(1) {
        let w = VerticalSubgroup::new(std::f64::consts::PI * k as f64 / n_dirs.max(1) as f64);
        let (lo, hi) = inside.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            let v = w.normal_offset(*p);
            (a.min(v), b.max(v))
        });
        let half = 0.5 * (hi - lo);
        if best.map_or(true, |(b, _)| half < b) {
            best = Some((half, VerticalPlane::new(w, 0.5 * (lo + hi))));
        }
    }
    let (half, plane) = best.ok_or(Error::Undefined)?;
    Ok(BetaRecord { ball: *ball, beta: half / ball.radius, best_plane: plane, method: BetaMethod::Brute })
}

/// `sup |φ − ψ| / r` over nodes of `g` whose graph point lies in the ball.
pub fn beta_against_candidate(g: &GridGraph, ball: &Ball, psi: &GridGraph) -> Result<f64> {
    let nodes = g.nodes_in_ball(ball.center, ball.radius);
    if nodes.is_empty() {
        return Err(Error::Undefined);
    }
    let mut sup = 0.0f64;
    let mut uncovered = 0usize;
    for &k in &nodes {
        let (i, j) = g.grid.node(k);
        match psi.interpolate(g.grid.y(i), g.grid.t(j)) {
            Some(v) => sup = sup.max((g.phi[k] - v).abs()),
            None => uncovered += 1,
        }
    }
    if uncovered > 0 {
        return Err(Error::Coverage { uncovered, total: nodes.len() });
    }
    Ok(sup / ball.radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaCgConfig {
    pub knots: usize,
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for BetaCgConfig {
    fn default() -> Self {
        BetaCgConfig { knots: 5, starts: 8, max_iter: 500, seed: 0 }
    }
}

/// Upper bound on β_CG together with the candidate that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCgEstimate {
    pub value: f64,
    pub c: f64,
    pub g: PiecewiseLinear,
    pub y_ref: f64,
    /// Sampled Lipschitz constant of the candidate on the projected ball.
    pub lipschitz: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct CgProblem {
    ys: Vec<f64>,
    taus: Vec<f64>,
    phis: Vec<f64>,
    r: f64,
    y_ref: f64,
    s_range: (f64, f64),
    l_bound: f64,
    domain: Domain,
}

const PENALTY: f64 = 1e3;

impl CgProblem {
    fn spec(&self, c: f64, knots: &[f64], values: &[f64]) -> CGSpec {
        CGSpec {
            c,
            g: PiecewiseLinear { knots: knots.to_vec(), values: values.to_vec() },
            domain: self.domain,
            y_ref: self.y_ref,
        }
    }

    fn cost(&self, c: f64, knots: &[f64], values: &[f64]) -> f64 {
        let spec = self.spec(c, knots, values);
        let mut violation = (c.abs() - self.l_bound).max(0.0);
        for m in spec.g.slopes() {
            for s in [self.s_range.0, self.s_range.1] {
                violation += (-(1.0 + s * m) + 1e-9).max(0.0);
            }
        }
        if violation > 0.0 {
            return PENALTY + violation;
        }
        let mut sup = 0.0f64;
        for k in 0..self.ys.len() {
            match spec.eval(self.ys[k], self.taus[k]) {
                Ok(v) => sup = sup.max((v - self.phis[k]).abs()),
                Err(_) => return PENALTY,
            }
        }
        sup / self.r
    }

    fn candidate_lipschitz(&self, c: f64, knots: &[f64], values: &[f64]) -> f64 {
        let spec = self.spec(c, knots, values);
        let pts: Vec<HPoint> = (0..self.ys.len())
            .filter_map(|k| spec.eval(self.ys[k], self.taus[k]).ok().map(|v| graph_point(self.ys[k], self.taus[k], v)))
            .collect();
        if pts.len() < 2 {
            return 0.0;
        }
        lipschitz_constant(&GraphPointSet { points: pts, mass: vec![], provenance: String::new() })
    }
}

/// Binned averages of `(x_i, v_i)` at the knots, gaps filled linearly.
fn binned(knots: &[f64], xs: &[f64], vs: &[f64]) -> Vec<f64> {
    let k = knots.len();
    let half = if k > 1 { 0.5 * (knots[1] - knots[0]) } else { f64::INFINITY };
    let mut sums = vec![(0.0, 0usize); k];
    for (x, v) in xs.iter().zip(vs) {
        let nearest = (0..k).min_by(|&a, &b| (knots[a] - x).abs().total_cmp(&(knots[b] - x).abs())).unwrap_or(0);
        if (knots[nearest] - x).abs() <= half * 1.000001 {
            sums[nearest].0 += v;
            sums[nearest].1 += 1;
        }
    }
    let known: Vec<(usize, f64)> =
        sums.iter().enumerate().filter(|(_, s)| s.1 > 0).map(|(i, s)| (i, s.0 / s.1 as f64)).collect();
    if known.is_empty() {
        let mean = if vs.is_empty() { 0.0 } else { vs.iter().sum::<f64>() / vs.len() as f64 };
        return vec![mean; k];
    }
    (0..k)
        .map(|i| {
            let after = known.iter().find(|(j, _)| *j >= i);
            let before = known.iter().rev().find(|(j, _)| *j <= i);
            match (before, after) {
                (Some(b), Some(a)) if a.0 != b.0 => b.1 + (a.1 - b.1) * (i - b.0) as f64 / (a.0 - b.0) as f64,
                (Some(b), _) => b.1,
                (None, Some(a)) => a.1,
                (None, None) => 0.0,
            }
        })
        .collect()
}

pub fn beta_cg_estimate(g: &GridGraph, ball: &Ball, l_bound: f64) -> Result<BetaCgEstimate> {
    beta_cg_estimate_with(g, ball, l_bound, &BetaCgConfig::default(), None)
}

/// Nelder–Mead over `(c, g(t_1), …, g(t_K))` with several deterministic
/// starts; `warm` is added as an extra start.
pub fn beta_cg_estimate_with(
    g: &GridGraph,
    ball: &Ball,
    l_bound: f64,
    cfg: &BetaCgConfig,
    warm: Option<(f64, &PiecewiseLinear)>,
) -> Result<BetaCgEstimate> {
    let nodes = g.nodes_in_ball(ball.center, ball.radius);
    if nodes.is_empty() {
        return Err(Error::Undefined);
    }
    let grad = intrinsic_gradient(g).ok();
    let ys: Vec<f64> = nodes.iter().map(|&k| g.grid.y(g.grid.node(k).0)).collect();
    let taus: Vec<f64> = nodes.iter().map(|&k| g.grid.t(g.grid.node(k).1)).collect();
    let phis: Vec<f64> = nodes.iter().map(|&k| g.phi[k]).collect();
    let y_ref = project_w(ball.center, VerticalSubgroup::yt()).y;
    let (mut s_lo, mut s_hi) = (0.0f64, 0.0f64);
    for y in &ys {
        s_lo = s_lo.min(y - y_ref);
        s_hi = s_hi.max(y - y_ref);
    }
    let c0 = grad
        .as_ref()
        .map(|gr| nodes.iter().map(|&k| gr[k]).sum::<f64>() / nodes.len() as f64)
        .unwrap_or(0.0)
        .clamp(-l_bound, l_bound);
    let feet: Vec<f64> = (0..ys.len())
        .map(|k| {
            let s = ys[k] - y_ref;
            taus[k] + 0.5 * c0 * s * s - phis[k] * s
        })
        .collect();
    let carried: Vec<f64> = (0..ys.len()).map(|k| phis[k] - c0 * (ys[k] - y_ref)).collect();
    let (fmin, fmax) = feet.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let pad = 0.05 * (fmax - fmin) + 1e-6;
    let knots = uniform_knots(fmin - pad, fmax + pad, cfg.knots.max(1));
    let problem = CgProblem {
        ys,
        taus,
        phis: phis.clone(),
        r: ball.radius,
        y_ref,
        s_range: (s_lo, s_hi),
        l_bound,
        domain: Domain { y: [f64::NEG_INFINITY, f64::INFINITY], t: [f64::NEG_INFINITY, f64::INFINITY] },
    };

    let g0 = binned(&knots, &feet, &carried);
    let (cmin, cmax) = carried.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let scale = (cmax - cmin).abs().max(1e-3);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some((wc, wg)) = warm {
        let mut x = vec![wc];
        x.extend(knots.iter().map(|t| wg.eval(*t)));
        starts.push(x);
    }
    let mut base = vec![c0];
    base.extend(&g0);
    starts.push(base.clone());
    let mut flat = vec![c0];
    flat.extend(std::iter::repeat(0.5 * (cmin + cmax)).take(knots.len()));
    starts.push(flat);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_cafe);
    while starts.len() < cfg.starts.max(1) + usize::from(warm.is_some()) {
        let mut x = base.clone();
        x[0] += 0.1 * (1.0 + c0.abs()) * rng.gen_range(-1.0..1.0);
        for v in x.iter_mut().skip(1) {
            *v += 0.1 * scale * rng.gen_range(-1.0..1.0);
        }
        starts.push(x);
    }
    let mut step = vec![0.05 * (1.0 + c0.abs())];
    step.extend(std::iter::repeat(0.05 * scale).take(knots.len()));

    let runs: Vec<(f64, Vec<f64>, bool, usize)> = starts
        .par_iter()
        .map(|x0| {
            let f = |x: &[f64]| problem.cost(x[0], &knots, &x[1..]);
            let f0 = f(x0);
            let r = nelder_mead(f, x0, &step, cfg.max_iter, 1e-13);
            if r.fx <= f0 {
                (r.fx, r.x, r.converged, r.evaluations)
            } else {
                (f0, x0.clone(), r.converged, r.evaluations)
            }
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.3).sum();
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| runs[a].0.total_cmp(&runs[b].0).then(a.cmp(&b)));
    for i in order {
        let (fx, x, converged, _) = &runs[i];
        if *fx >= PENALTY {
            break;
        }
        let lip = problem.candidate_lipschitz(x[0], &knots, &x[1..]);
        if lip <= l_bound {
            return Ok(BetaCgEstimate {
                value: *fx,
                c: x[0],
                g: PiecewiseLinear { knots: knots.clone(), values: x[1..].to_vec() },
                y_ref,
                lipschitz: lip,
                converged: *converged,
                evaluations,
            });
        }
    }
    // a graph parallel to W is always admissible
    let mut sorted = phis;
    sorted.sort_by(|a, b| a.total_cmp(b));
    let d = 0.5 * (sorted[0] + sorted[sorted.len() - 1]);
    let values = vec![d; knots.len()];
    Ok(BetaCgEstimate {
        value: problem.cost(0.0, &knots, &values),
        c: 0.0,
        g: PiecewiseLinear { knots, values },
        y_ref,
        lipschitz: 0.0,
        converged: false,
        evaluations,
    })
}

/// Estimates for increasing knot counts, each warm-started from the
/// previous best; the reported values never increase.
pub fn beta_cg_sweep(
    g: &GridGraph,
    ball: &Ball,
    l_bound: f64,
    ks: &[usize],
    cfg: &BetaCgConfig,
) -> Result<Vec<BetaCgEstimate>> {
    let mut out: Vec<BetaCgEstimate> = Vec::new();
    for &k in ks {
        let c = BetaCgConfig { knots: k, ..*cfg };
        let warm = out.last().map(|e| (e.c, &e.g));
        let est = beta_cg_estimate_with(g, ball, l_bound, &c, warm)?;
        match out.last() {
            Some(prev) if prev.value < est.value => out.push(prev.clone()),
            _ => out.push(est),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinBoundary {
    pub s: f64,
    pub a: f64,
}

/// Annulus widths probed by the thin-boundary search.
pub const THIN_LAMBDAS: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];
const THIN_RADII: usize = 33;

/// `sup_λ μ(A(x,(1−λ)s,(1+λ)s)) / (λ μ(B(x,2r)))` over [`THIN_LAMBDAS`].
pub fn thinness(s_set: &GraphPointSet, center: HPoint, r: f64, s: f64) -> Result<f64> {
    let (d, m, total) = radial_profile(s_set, center, r)?;
    Ok(thinness_sorted(&d, &m, total, s))
}

fn radial_profile(s_set: &GraphPointSet, center: HPoint, r: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut pairs: Vec<(f64, f64)> = s_set
        .points
        .iter()
        .zip(&s_set.mass)
        .map(|(p, m)| (dist(*p, center), *m))
        .filter(|(d, _)| *d <= 2.0 * r)
        .collect();
    if pairs.is_empty() {
        return Err(Error::Empty("no samples in B(x, 2r)"));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if !(total > 0.0) {
        return Err(Error::Empty("zero mass in B(x, 2r)"));
    }
    let d = pairs.iter().map(|p| p.0).collect();
    let mut acc = 0.0;
    let mut cum = Vec::with_capacity(pairs.len() + 1);
    cum.push(0.0);
    for p in &pairs {
        acc += p.1;
        cum.push(acc);
    }
    Ok((d, cum, total))
}

fn thinness_sorted(d: &[f64], cum: &[f64], total: f64, s: f64) -> f64 {
    THIN_LAMBDAS
        .iter()
        .map(|&lam| {
            let lo = d.partition_point(|&v| v < (1.0 - lam) * s);
            let hi = d.partition_point(|&v| v <= (1.0 + lam) * s);
            (cum[hi] - cum[lo]) / (lam * total)
        })
        .fold(0.0, f64::max)
}

/// Radius in `[r, (1+δ)r]` with the smallest thinness constant.
pub fn thin_boundary_radius(s_set: &GraphPointSet, center: HPoint, r: f64, delta: f64) -> Result<ThinBoundary> {
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::Config(format!("delta must lie in (0, 1/4), got {delta}")));
    }
    let (d, cum, total) = radial_profile(s_set, center, r)?;
    let mut best = ThinBoundary { s: r, a: f64::INFINITY };
    for k in 0..THIN_RADII {
        let s = r * (1.0 + delta * k as f64 / (THIN_RADII - 1) as f64);
        let a = thinness_sorted(&d, &cum, total, s);
        if a < best.a {
            best = ThinBoundary { s, a };
        }
    }
    Ok(best)
}

/// Whether `μ(B(x,2r) ∩ A(x,(1−λ)s,(1+λ)s)) ≤ Aλμ(B(x,2r))`.
pub fn has_thin_boundary(s_set: &GraphPointSet, center: HPoint, r: f64, s: f64, a: f64, lambda: f64) -> Result<bool> {
    let (d, cum, total) = radial_profile(s_set, center, r)?;
    let lo = d.partition_point(|&v| v < (1.0 - lambda) * s);
    let hi = d.partition_point(|&v| v <= (1.0 + lambda) * s);
    Ok(cum[hi] - cum[lo] <= a * lambda * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationProbe {
    pub sub_ball: Ball,
    pub gap: f64,
    pub whole_average: f64,
    pub sub_average: f64,
}

fn average(values: &[f64], nodes: &[usize]) -> f64 {
    nodes.iter().map(|&k| values[k]).sum::<f64>() / nodes.len() as f64
}

/// Largest gap between the average gradient on a projected sub-ball and on
/// the projected ball, over a 5×5×5 lattice of centres snapped onto the graph
/// and radii `r/2, r/4, …` down to `δ_scale·r`.
pub fn gradient_fluctuation_probe(g: &GridGraph, ball: &Ball, delta_scale: f64) -> Result<FluctuationProbe> {
    let grad = intrinsic_gradient(g)?;
    let r = ball.radius;
    let nearest = (0..g.grid.len())
        .map(|k| {
            let (i, j) = g.grid.node(k);
            dist(g.point(i, j), ball.center)
        })
        .fold(f64::INFINITY, f64::min);
    if nearest > r / 10.0 {
        return Err(Error::Hypothesis(format!("ball centre is {nearest} from the samples, more than r/10")));
    }
    let whole = g.nodes_in_ball(ball.center, r);
    if whole.is_empty() {
        return Err(Error::Undefined);
    }
    let whole_avg = average(&grad, &whole);
    let grid = g.grid;
    let lattice = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut centers: Vec<(usize, usize)> = Vec::new();
    for a in lattice {
        for b in lattice {
            for c in lattice {
                let p = ball.center * HPoint::new(a * r, b * r, c * r * r);
                let pw = project_w(p, VerticalSubgroup::yt());
                let i = ((pw.y - grid.y0) / grid.dy).round().clamp(0.0, (grid.ny - 1) as f64) as usize;
                let j = ((pw.t - grid.t0) / grid.dt).round().clamp(0.0, (grid.nt - 1) as f64) as usize;
                if !centers.contains(&(i, j)) {
                    centers.push((i, j));
                }
            }
        }
    }
    let mut radii = Vec::new();
    let mut s = r / 2.0;
    while s >= delta_scale * r * (1.0 - 1e-12) {
        radii.push(s);
        s /= 2.0;
    }
    let candidates: Vec<(Ball, f64)> = centers
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let y = g.point(i, j);
            let d0 = dist(y, ball.center);
            let grad = &grad;
            radii.iter().filter_map(move |&s| {
                if d0 + s > r {
                    return None;
                }
                let nodes = g.nodes_in_ball(y, s);
                if nodes.len() < 4 {
                    return None;
                }
                Some((Ball { center: y, radius: s }, average(grad, &nodes)))
            })
        })
        .collect();
    let mut best: Option<FluctuationProbe> = None;
    for (b, avg) in candidates {
        let gap = (avg - whole_avg).abs();
        if best.map_or(true, |p| gap > p.gap) {
            best = Some(FluctuationProbe { sub_ball: b, gap, whole_average: whole_avg, sub_average: avg });
        }
    }
    best.ok_or(Error::NoAdmissibleBall)
}

/// Both sides of the annulus estimate for node values `f`:
/// `|E_{B₁} f − E_{B₂} f|` and `2·μ(annulus)/|π_W(B₂∩Γ)|·‖f‖∞`.
pub fn annulus_control(g: &GridGraph, x: HPoint, s1: f64, s2: f64, f: &[f64]) -> Result<(f64, f64)> {
    let b1 = g.nodes_in_ball(x, s1);
    let b2 = g.nodes_in_ball(x, s2);
    if b1.is_empty() || b2.is_empty() {
        return Err(Error::Undefined);
    }
    let annulus_mass: f64 = b2
        .iter()
        .filter(|&&k| {
            let (i, j) = g.grid.node(k);
            dist(g.point(i, j), x) >= s1
        })
        .map(|&k| g.mass[k])
        .sum();
    let area2 = b2.len() as f64 * g.grid.cell_area();
    let sup = b2.iter().map(|&k| f[k].abs()).fold(0.0, f64::max);
    let lhs = (average(f, &b1) - average(f, &b2)).abs();
    Ok((lhs, 2.0 * annulus_mass / area2 * sup))
}
