//! Christ–David cubes on weighted point clouds, Carleson packing sums and the
//! WGL integral estimator.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{beta_of_members, Ball};
use crate::error::{Error, Result};
use crate::graphs::GraphPointSet;
use crate::heis::{dist, HPoint};
use crate::index::PointIndex;

pub const DEFAULT_BALL_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub id: usize,
    pub level: i32,
    /// Sample index of `z_Q`.
    pub center: usize,
    pub center_point: HPoint,
    pub mass: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Sample indices, ascending.
    pub members: Vec<usize>,
    pub beta: Option<f64>,
    pub beta_cg: Option<f64>,
}

impl Cube {
    pub fn side(&self) -> f64 {
        (self.level as f64).exp2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeTree {
    pub j_min: i32,
    pub j_max: i32,
    pub ball_multiplier: f64,
    pub total_mass: f64,
    pub cubes: Vec<Cube>,
    /// `levels[j_max - j]` lists the cube ids of level `j`.
    pub levels: Vec<Vec<usize>>,
}

impl CubeTree {
    pub fn level(&self, j: i32) -> &[usize] {
        if j < self.j_min || j > self.j_max {
            return &[];
        }
        &self.levels[(self.j_max - j) as usize]
    }

    pub fn root(&self) -> &Cube {
        &self.cubes[self.levels[0][0]]
    }

    /// `B_Q = B(z_Q, m·ℓ(Q))`.
    pub fn ball_of(&self, id: usize) -> Ball {
        let q = &self.cubes[id];
        Ball { center: q.center_point, radius: self.ball_multiplier * q.side() }
    }

    /// Cube ids of `Δ(Q₀)` in pre-order, `Q₀` first.
    pub fn descendants(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(q) = stack.pop() {
            out.push(q);
            stack.extend(self.cubes[q].children.iter().rev());
        }
        out
    }

    /// Cube of level `j` containing sample `i`.
    pub fn cube_of(&self, i: usize, j: i32) -> Option<usize> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        let mut q = self.levels[0][0];
        while self.cubes[q].level > j {
            q = *self.cubes[q].children.iter().find(|&&c| self.cubes[c].members.binary_search(&i).is_ok())?;
        }
        Some(q)
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `⌊log₂(4·median nearest-neighbour distance)⌋`.
pub fn default_j_min(points: &[HPoint]) -> Option<i32> {
    if points.len() < 2 {
        return None;
    }
    let index = PointIndex::new(points);
    let mut nn: Vec<f64> =
        (0..points.len()).into_par_iter().filter_map(|i| index.nearest_other(i).map(|x| x.1)).collect();
    nn.sort_by(|a, b| a.total_cmp(b));
    let med = nn[nn.len() / 2];
    if !(med > 0.0) {
        return None;
    }
    Some((4.0 * med).log2().floor() as i32)
}

/// `⌊log₂(min nearest-neighbour distance)⌋`: leaves are then single samples,
/// so any two distinct samples end up in different cubes.
pub fn finest_j_min(points: &[HPoint]) -> Option<i32> {
    if points.len() < 2 {
        return None;
    }
    let index = PointIndex::new(points);
    let min = (0..points.len())
        .into_par_iter()
        .filter_map(|i| index.nearest_other(i).map(|x| x.1))
        .reduce(|| f64::INFINITY, f64::min);
    (min > 0.0 && min.is_finite()).then(|| min.log2().floor() as i32)
}

/// Smallest `j` with `2^j ≥ 2·max_i d(p_0, p_i)`, an upper bound on the
/// diameter that avoids the quadratic scan.
pub fn default_j_max(points: &[HPoint]) -> i32 {
    let d = points.iter().map(|p| 2.0 * dist(*p, points[0])).fold(0.0, f64::max);
    if d > 0.0 {
        d.log2().ceil() as i32
    } else {
        0
    }
}

pub fn diameter(points: &[HPoint]) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|q| dist(points[i], *q)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

fn diameter_of(points: &[HPoint], idx: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for (a, &i) in idx.iter().enumerate() {
        for &k in &idx[a + 1..] {
            d = d.max(dist(points[i], points[k]));
        }
    }
    d
}

/// Greedy farthest-point net of `members` seeded by its lowest index, with
/// covering radius at most `rho`; returns centres and the assignment of each
/// member to its nearest centre (lowest index on ties).
fn farthest_point_partition(points: &[HPoint], members: &[usize], rho: f64) -> (Vec<usize>, Vec<usize>) {
    let mut centers = vec![members[0]];
    let mut near: Vec<f64> = members.iter().map(|&i| dist(points[i], points[members[0]])).collect();
    let mut owner = vec![0usize; members.len()];
    loop {
        let (far, d) =
            near.iter().enumerate().fold((0usize, -1.0f64), |acc, (k, &d)| if d > acc.1 { (k, d) } else { acc });
        if d <= rho {
            break;
        }
        let c = members[far];
        let ci = centers.len();
        centers.push(c);
        for (k, &i) in members.iter().enumerate() {
            let d = dist(points[i], points[c]);
            if d < near[k] {
                near[k] = d;
                owner[k] = ci;
            }
        }
    }
    (centers, owner)
}

/// Top-down construction: the root is all of `S` at level `j_max`; each cube
/// of level `j` is split by a `2^{j-1}`-separated net of its members with
/// covering radius `2^{j-1}`.
pub fn build_cubes(s: &GraphPointSet, j_min: i32, j_max: i32) -> Result<CubeTree> {
    if s.is_empty() {
        return Err(Error::Empty("point set"));
    }
    if j_min > j_max {
        return Err(Error::Config(format!("j_min {j_min} exceeds j_max {j_max}")));
    }
    let pts = &s.points;
    let far = pts.iter().map(|p| dist(*p, pts[0])).fold(0.0, f64::max);
    let top = (j_max as f64).exp2();
    if 2.0 * far > top && diameter(pts) > top {
        return Err(Error::Config(format!("2^{j_max} is smaller than the diameter of the samples")));
    }
    let all: Vec<usize> = (0..s.len()).collect();
    let mut cubes = vec![Cube {
        id: 0,
        level: j_max,
        center: 0,
        center_point: pts[0],
        mass: s.total_mass(),
        parent: None,
        children: vec![],
        members: all,
        beta: None,
        beta_cg: None,
    }];
    let mut levels = vec![vec![0usize]];
    for j in (j_min..j_max).rev() {
        // covering radius 2^{j-1} keeps diam ≤ 2^j
        let rho = (j as f64 - 1.0).exp2();
        let parents = levels.last().unwrap().clone();
        let splits: Vec<(usize, Vec<usize>, Vec<usize>)> = parents
            .par_iter()
            .map(|&p| {
                let members = &cubes[p].members;
                let (centers, owner) = farthest_point_partition(pts, members, rho);
                (p, centers, owner)
            })
            .collect();
        let mut this_level = Vec::new();
        for (p, centers, owner) in splits {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
            for (k, &i) in cubes[p].members.iter().enumerate() {
                groups[owner[k]].push(i);
            }
            let mut order: Vec<usize> = (0..centers.len()).collect();
            order.sort_by_key(|&c| centers[c]);
            for c in order {
                let id = cubes.len();
                let members = std::mem::take(&mut groups[c]);
                cubes.push(Cube {
                    id,
                    level: j,
                    center: centers[c],
                    center_point: pts[centers[c]],
                    mass: s.mass_of(&members),
                    parent: Some(p),
                    children: vec![],
                    members,
                    beta: None,
                    beta_cg: None,
                });
                cubes[p].children.push(id);
                this_level.push(id);
            }
        }
        levels.push(this_level);
    }
    Ok(CubeTree { j_min, j_max, ball_multiplier: DEFAULT_BALL_MULTIPLIER, total_mass: s.total_mass(), cubes, levels })
}

/// Fills `β(Q) = β(B_Q)` for every cube, evaluated on all samples.
pub fn compute_betas(tree: &mut CubeTree, s: &GraphPointSet, index: &PointIndex) {
    let balls: Vec<Ball> = (0..tree.cubes.len()).map(|id| tree.ball_of(id)).collect();
    let betas: Vec<f64> = balls
        .par_iter()
        .map(|b| {
            let members = index.ball(b.center, b.radius);
            beta_of_members(&s.points, &members, b).map(|r| r.beta).unwrap_or(0.0)
        })
        .collect();
    for (q, b) in tree.cubes.iter_mut().zip(betas) {
        q.beta = Some(b);
    }
}

/// Invariant report; `Err(Invariant)` on any exact-property violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeInvariants {
    pub cubes: usize,
    pub max_diameter_ratio: f64,
    pub max_mass_error: f64,
    /// Largest `c` such that every `B(z_Q, c·2^j) ∩ S ⊂ Q`.
    pub inner_ball_constant: f64,
    pub regularity_lower: f64,
    pub regularity_upper: f64,
}

pub fn check_invariants(tree: &CubeTree, s: &GraphPointSet, index: &PointIndex) -> Result<CubeInvariants> {
    let n = s.len();
    let pts = &s.points;
    for j in tree.j_min..=tree.j_max {
        let mut seen = vec![false; n];
        for &q in tree.level(j) {
            for &i in &tree.cubes[q].members {
                if seen[i] {
                    return Err(Error::Invariant(format!("sample {i} in two cubes of level {j}")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|b| !b) {
            return Err(Error::Invariant(format!("sample {i} missing at level {j}")));
        }
    }
    for q in &tree.cubes {
        if !q.children.is_empty() {
            let mut union: Vec<usize> =
                q.children.iter().flat_map(|&c| tree.cubes[c].members.iter().copied()).collect();
            union.sort_unstable();
            if union != q.members {
                return Err(Error::Invariant(format!("cube {} is not the union of its children", q.id)));
            }
        } else if q.level != tree.j_min {
            return Err(Error::Invariant(format!("cube {} has no children above j_min", q.id)));
        }
    }
    let stats: Vec<(f64, f64, f64, f64)> = tree
        .cubes
        .par_iter()
        .map(|q| {
            let side = q.side();
            let diam = diameter_of(pts, &q.members);
            let mass_err = (q.mass - s.mass_of(&q.members)).abs() / tree.total_mass.max(f64::MIN_POSITIVE);
            let inner = index
                .ball(q.center_point, 2.0 * side)
                .into_iter()
                .filter(|i| q.members.binary_search(i).is_err())
                .map(|i| dist(pts[i], q.center_point))
                .fold(2.0 * side, f64::min)
                / side;
            (diam / side, mass_err, inner, q.mass / side.powi(3))
        })
        .collect();
    let mut out = CubeInvariants {
        cubes: tree.cubes.len(),
        max_diameter_ratio: 0.0,
        max_mass_error: 0.0,
        inner_ball_constant: f64::INFINITY,
        regularity_lower: f64::INFINITY,
        regularity_upper: 0.0,
    };
    for (d, m, c, r) in stats {
        out.max_diameter_ratio = out.max_diameter_ratio.max(d);
        out.max_mass_error = out.max_mass_error.max(m);
        out.inner_ball_constant = out.inner_ball_constant.min(c);
        out.regularity_lower = out.regularity_lower.min(r);
        out.regularity_upper = out.regularity_upper.max(r);
    }
    if out.max_diameter_ratio > 1.0 {
        return Err(Error::Invariant(format!("cube diameter ratio {}", out.max_diameter_ratio)));
    }
    for j in tree.j_min..=tree.j_max {
        let m: f64 = tree.level(j).iter().map(|&q| tree.cubes[q].mass).sum();
        let rel = (m - tree.total_mass).abs() / tree.total_mass.max(f64::MIN_POSITIVE);
        if rel > 1e-12 {
            return Err(Error::Invariant(format!("level {j} mass off by {rel}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiblingPair {
    pub level: i32,
    pub qx: usize,
    pub qy: usize,
}

/// For distinct samples `x, y`: the level-`j` cubes containing them, where
/// `j` is the largest integer with `2^j ≤ d(x,y)`. `None` when that level is
/// below `j_min` or the points coincide.
pub fn sibling_pair(tree: &CubeTree, s: &GraphPointSet, x: usize, y: usize) -> Option<SiblingPair> {
    let d = dist(s.points[x], s.points[y]);
    if !(d > 0.0) {
        return None;
    }
    let j = (d.log2().floor() as i32).min(tree.j_max);
    if j < tree.j_min {
        return None;
    }
    Some(SiblingPair { level: j, qx: tree.cube_of(x, j)?, qy: tree.cube_of(y, j)? })
}

/// Whether the pair is disjoint and each cube lies in the other's `B(z,4ℓ)`.
pub fn sibling_pair_holds(tree: &CubeTree, s: &GraphPointSet, pair: &SiblingPair) -> bool {
    let (a, b) = (&tree.cubes[pair.qx], &tree.cubes[pair.qy]);
    if a.id == b.id {
        return false;
    }
    let r = 4.0 * a.side();
    let inside = |q: &Cube, c: HPoint| q.members.iter().all(|&i| dist(s.points[i], c) <= r);
    inside(b, a.center_point) && inside(a, b.center_point)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlesonRow {
    pub root_id: usize,
    pub level: i32,
    pub epsilon: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub epsilons: Vec<f64>,
    pub rows: Vec<CarlesonRow>,
    /// `sup_{Q₀} K(ε, Q₀)`, one per threshold.
    pub sup: Vec<f64>,
}

impl CarlesonReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["root_id", "epsilon", "K"])?;
        for r in &self.rows {
            wr.write_record([r.root_id.to_string(), r.epsilon.to_string(), r.k.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn sup_at(&self, eps: f64) -> Option<f64> {
        self.epsilons.iter().position(|e| *e == eps).map(|k| self.sup[k])
    }
}

/// `K(ε,Q₀) = Σ_{Q ⊆ Q₀, β(Q) ≥ ε} μ(Q)/μ(Q₀)` for every root `Q₀` with
/// level in `root_levels` (all levels when `None`).
pub fn carleson_sum(tree: &CubeTree, epsilons: &[f64], root_levels: Option<(i32, i32)>) -> Result<CarlesonReport> {
    let betas: Vec<f64> =
        tree.cubes.iter().map(|q| q.beta.ok_or(Error::MissingBeta(q.id))).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = root_levels.unwrap_or((tree.j_min, tree.j_max));
    let mut rows = Vec::new();
    let mut sup = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        // bottom-up subtree sums; ids increase with depth
        let mut acc = vec![0.0f64; tree.cubes.len()];
        for q in tree.cubes.iter().rev() {
            let own = if betas[q.id] >= eps { q.mass } else { 0.0 };
            acc[q.id] = own + q.children.iter().map(|&c| acc[c]).sum::<f64>();
        }
        let mut s = 0.0f64;
        for j in (lo.max(tree.j_min)..=hi.min(tree.j_max)).rev() {
            for &q in tree.level(j) {
                let m = tree.cubes[q].mass;
                let k = if m > 0.0 { acc[q] / m } else { 0.0 };
                s = s.max(k);
                rows.push(CarlesonRow { root_id: q, level: j, epsilon: eps, k });
            }
        }
        sup.push(s);
    }
    Ok(CarlesonReport { epsilons: epsilons.to_vec(), rows, sup })
}

/// Dyadic radii `R, R/2, …` down to `s_min`.
pub fn wgl_scales(r: f64, s_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = r;
    while s >= s_min * (1.0 - 1e-12) && s > 0.0 {
        out.push(s);
        s *= 0.5;
    }
    out
}

/// `Σ_s ln2 · Σ_{y ∈ S∩B(x,R), β(B(y,s)) > ε} μ(y)` over [`wgl_scales`], a
/// dyadic Riemann sum of the WGL double integral.
pub fn wgl_integral_estimate(
    s: &GraphPointSet,
    index: &PointIndex,
    eps: f64,
    x: HPoint,
    r: f64,
    s_min: f64,
) -> Result<f64> {
    let centers = index.ball(x, r);
    if centers.is_empty() {
        return Err(Error::Empty("no samples in B(x, R)"));
    }
    let scales = wgl_scales(r, s_min);
    // summed in index order so the result does not depend on the thread count
    let weighted: Vec<f64> = centers
        .par_iter()
        .map(|&i| {
            let y = s.points[i];
            let hits = scales
                .iter()
                .filter(|&&sc| {
                    let ball = Ball { center: y, radius: sc };
                    beta_of_members(&s.points, &index.ball(y, sc), &ball).map(|b| b.beta > eps).unwrap_or(false)
                })
                .count();
            hits as f64 * s.mass[i]
        })
        .collect();
    Ok(std::f64::consts::LN_2 * weighted.iter().sum::<f64>())
}

/// Cube-side bound for [`wgl_integral_estimate`]: a shell at scale
/// `s ∈ (2^{j-1}, 2^j]` around `y ∈ Q ∈ Δ_j` sits inside `B(z_Q, 2ℓ(Q))`,
/// so `β(B(y,s)) > ε` forces `β(Q) > ε·s/(m·ℓ(Q)) ≥ ε/(2m)`.
pub fn wgl_cube_bound(tree: &CubeTree, eps: f64, scales: &[f64]) -> Result<f64> {
    let thr = eps / (2.0 * tree.ball_multiplier);
    let mut total = 0.0;
    for &sc in scales {
        let j = sc.log2().ceil() as i32;
        if j < tree.j_min || j > tree.j_max {
            return Err(Error::Config(format!("scale {sc} outside the cube levels")));
        }
        for &q in tree.level(j) {
            let b = tree.cubes[q].beta.ok_or(Error::MissingBeta(q))?;
            if b > thr {
                total += tree.cubes[q].mass;
            }
        }
    }
    Ok(std::f64::consts::LN_2 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{GridGraph, GridSpec};

    fn plane_set(h: f64) -> GraphPointSet {
        let n = (2.0 / h).round() as usize + 1;
        let grid = GridSpec::spanning(-1.0, 1.0, -1.0, 1.0, n, (n - 1) * (n - 1) / 4 + 1).unwrap();
        GridGraph::from_fn(grid, |_, _| 0.0).unwrap().to_point_set()
    }

    #[test]
    fn single_point_chain() {
        let s = GraphPointSet::uniform(vec![HPoint::new(0.1, 0.2, 0.3)], "one").unwrap();
        let t = build_cubes(&s, -3, 1).unwrap();
        assert_eq!(t.cubes.len(), 5);
        assert!(t.cubes.iter().all(|q| q.members == vec![0]));
        let idx = PointIndex::new(&s.points);
        check_invariants(&t, &s, &idx).unwrap();
    }

    #[test]
    fn plane_cubes_are_regular() {
        let s = plane_set(1.0 / 8.0);
        let idx = PointIndex::new(&s.points);
        let j_min = default_j_min(&s.points).unwrap();
        let t = build_cubes(&s, j_min, default_j_max(&s.points)).unwrap();
        let inv = check_invariants(&t, &s, &idx).unwrap();
        assert!(inv.inner_ball_constant > 0.0);
        assert!(inv.max_mass_error <= 1e-12);
        assert!(inv.regularity_lower > 0.0 && inv.regularity_upper.is_finite());
    }

    #[test]
    fn carleson_on_plane_is_zero() {
        let s = plane_set(1.0 / 8.0);
        let idx = PointIndex::new(&s.points);
        let mut t = build_cubes(&s, -2, default_j_max(&s.points)).unwrap();
        assert!(carleson_sum(&t, &[0.1], None).is_err());
        compute_betas(&mut t, &s, &idx);
        let rep = carleson_sum(&t, &[1e-6, 0.1, 0.5], None).unwrap();
        assert!(rep.sup.iter().all(|k| *k == 0.0), "{:?}", rep.sup);
        let est = wgl_integral_estimate(&s, &idx, 1e-6, HPoint::IDENTITY, 0.5, 0.25).unwrap();
        assert_eq!(est, 0.0);
    }
}
