//! Big pieces of intrinsic Lipschitz graphs from big projections plus the
//! WGL: projection areas, good/bad cubes, the Jones coding argument and the
//! verification of the resulting pieces.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::beta::Ball;
use crate::cubes::CubeTree;
use crate::error::{Error, Result};
use crate::graphs::GraphPointSet;
use crate::heis::{dist, HPoint};
use crate::index::PointIndex;
use crate::planes::{in_cone, project_w, split, ConeSpec, VerticalSubgroup};

/// Constant of the measure lemma `L²(π_W(A)) ≤ C·H³(A)` used to pick `N`.
pub const MEASURE_LEMMA_C: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessConfig {
    pub b: f64,
    pub epsilon: f64,
    pub n: usize,
    pub w: VerticalSubgroup,
}

impl GoodnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !(self.epsilon > 0.0) || self.n < 1 {
            return Err(Error::Config(format!(
                "need b > 0, epsilon > 0, N >= 1; got b={}, epsilon={}, N={}",
                self.b, self.epsilon, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeString {
    pub bits: Vec<bool>,
}

impl CodeString {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn is_prefix_of(&self, other: &CodeString) -> bool {
        self.len() <= other.len() && other.bits[..self.len()] == self.bits[..]
    }

    /// Neither string is an initial segment of the other.
    pub fn separated_from(&self, other: &CodeString) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }
}

impl fmt::Display for CodeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CodeString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Config(format!("bad code character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CodeString { bits })
    }
}

impl Serialize for CodeString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Raster of `π_W` images in `(v, τ)` coordinates: cells `h × h²`, aligned
/// at the origin so that areas of different regions are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub w: VerticalSubgroup,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionArea {
    pub area: f64,
    pub cells: usize,
    /// Area of covered cells with an empty 4-neighbour.
    pub boundary_area: f64,
}

impl Raster {
    /// `h` = twice the median nearest-neighbour distance of the projected
    /// samples, measured with the homogeneous norm on `W`.
    pub fn calibrate(points: &[HPoint], idx: &[usize], w: VerticalSubgroup) -> Result<Raster> {
        if idx.len() < 2 {
            return Err(Error::Empty("need two samples to calibrate the raster"));
        }
        let mut proj: Vec<HPoint> = idx.iter().map(|&i| project_w(points[i], w)).collect();
        // overlapping sheets project onto the same points
        proj.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.t.total_cmp(&b.t)));
        proj.dedup();
        let index = PointIndex::new(&proj);
        let mut nn: Vec<f64> =
            (0..proj.len()).into_par_iter().filter_map(|i| index.nearest_other(i).map(|x| x.1)).collect();
        nn.retain(|d| *d > 0.0);
        if nn.is_empty() {
            return Err(Error::Undefined);
        }
        nn.sort_by(|a, b| a.total_cmp(b));
        Ok(Raster { w, h: 2.0 * nn[nn.len() / 2] })
    }

    fn cell(&self, p: HPoint) -> (i64, i64) {
        let (v, t) = self.w.coords(project_w(p, self.w));
        ((v / self.h).floor() as i64, (t / (self.h * self.h)).floor() as i64)
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h * self.h
    }

    pub fn cells_of(&self, points: &[HPoint], idx: &[usize]) -> HashSet<(i64, i64)> {
        idx.iter().map(|&i| self.cell(points[i])).collect()
    }

    pub fn area(&self, points: &[HPoint], idx: &[usize]) -> Result<ProjectionArea> {
        if idx.is_empty() {
            return Err(Error::Empty("projection region"));
        }
        let cells = self.cells_of(points, idx);
        let boundary = cells
            .iter()
            .filter(|(a, b)| {
                [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(da, db)| !cells.contains(&(a + da, b + db)))
            })
            .count();
        Ok(ProjectionArea {
            area: cells.len() as f64 * self.cell_area(),
            cells: cells.len(),
            boundary_area: boundary as f64 * self.cell_area(),
        })
    }
}

/// `L²(π_W(S ∩ region))` with the default raster of the region itself.
pub fn projection_area(points: &[HPoint], region: &[usize], w: VerticalSubgroup) -> Result<ProjectionArea> {
    if region.is_empty() {
        return Err(Error::Empty("projection region"));
    }
    Raster::calibrate(points, region, w)?.area(points, region)
}

/// `min L²(π_W(S∩B(x,R))) / R³` over the given balls.
pub fn bvp_constant(s: &GraphPointSet, index: &PointIndex, raster: &Raster, balls: &[Ball]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for b in balls {
        let idx = index.ball(b.center, b.radius);
        let a = raster.area(&s.points, &idx)?;
        best = best.min(a.area / b.radius.powi(3));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Empty("no balls"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub q0: usize,
    /// Maximal cubes with `L²(π_W(Q)) < (b/2)·μ(Q)`.
    pub b1: Vec<usize>,
    /// Cubes of `Δ(Q₀)` with `β(Q) > ε`.
    pub b2: Vec<usize>,
    pub r1: Vec<usize>,
    pub r2: Vec<usize>,
    /// `Σ_{Q∈B₂} χ_{B_Q}(x)` for each member of `Q₀` (indexed by sample).
    pub coverage: Vec<usize>,
    pub n: usize,
}

impl Classification {
    /// Samples of `Q₀ ∖ (R₁ ∪ R₂)`, ascending.
    pub fn good_samples(&self, tree: &CubeTree) -> Vec<usize> {
        let bad: HashSet<usize> = self.r1.iter().chain(&self.r2).copied().collect();
        tree.cubes[self.q0].members.iter().copied().filter(|i| !bad.contains(i)).collect()
    }
}

fn b2_coverage(tree: &CubeTree, q0: usize, index: &PointIndex, b2: &[usize], n_samples: usize) -> Vec<usize> {
    let in_q0: HashSet<usize> = tree.cubes[q0].members.iter().copied().collect();
    let mut coverage = vec![0usize; n_samples];
    for &q in b2 {
        let ball = tree.ball_of(q);
        for i in index.ball(ball.center, ball.radius) {
            if in_q0.contains(&i) {
                coverage[i] += 1;
            }
        }
    }
    coverage
}

/// Smallest `N ≥ 1` with `μ(R₂(N)) ≤ b/(2C)·μ(Q₀)`.
pub fn choose_n(
    tree: &CubeTree,
    s: &GraphPointSet,
    index: &PointIndex,
    q0: usize,
    b: f64,
    epsilon: f64,
) -> Result<usize> {
    let b2 = beta_violators(tree, q0, epsilon)?;
    let coverage = b2_coverage(tree, q0, index, &b2, s.len());
    let target = b / (2.0 * MEASURE_LEMMA_C) * tree.cubes[q0].mass;
    let max = coverage.iter().copied().max().unwrap_or(0);
    for n in 1..=max + 1 {
        let m: f64 = tree.cubes[q0].members.iter().filter(|&&i| coverage[i] >= n).map(|&i| s.mass[i]).sum();
        if m <= target {
            return Ok(n);
        }
    }
    Ok(max + 1)
}

fn beta_violators(tree: &CubeTree, q0: usize, epsilon: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for q in tree.descendants(q0) {
        if tree.cubes[q].beta.ok_or(Error::MissingBeta(q))? > epsilon {
            out.push(q);
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn classify_cubes(
    tree: &CubeTree,
    s: &GraphPointSet,
    index: &PointIndex,
    q0: usize,
    cfg: &GoodnessConfig,
    raster: &Raster,
) -> Result<Classification> {
    cfg.validate()?;
    let mut b1 = Vec::new();
    let mut frontier = vec![q0];
    while !frontier.is_empty() {
        let areas: Vec<f64> = frontier
            .par_iter()
            .map(|&q| raster.area(&s.points, &tree.cubes[q].members).map(|a| a.area).unwrap_or(0.0))
            .collect();
        let mut next = Vec::new();
        for (&q, a) in frontier.iter().zip(areas) {
            if a < 0.5 * cfg.b * tree.cubes[q].mass {
                b1.push(q);
            } else {
                next.extend(tree.cubes[q].children.iter().copied());
            }
        }
        frontier = next;
    }
    b1.sort_unstable();
    let b2 = beta_violators(tree, q0, cfg.epsilon)?;
    let mut r1: Vec<usize> = b1.iter().flat_map(|&q| tree.cubes[q].members.iter().copied()).collect();
    r1.sort_unstable();
    let coverage = b2_coverage(tree, q0, index, &b2, s.len());
    let r2 = tree.cubes[q0].members.iter().copied().filter(|&i| coverage[i] >= cfg.n).collect();
    Ok(Classification { q0, b1, b2, r1, r2, coverage, n: cfg.n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub code: CodeString,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coding {
    /// `σ(Q)` for the cubes of `Δ(Q₀)`.
    pub cube_codes: BTreeMap<usize, CodeString>,
    /// Processed pairs `(Q, Q₁)` with `Q ∈ B₂` and `Q₁ ⊂ B_Q`.
    pub pairs: Vec<(usize, usize)>,
    pub pieces: Vec<Piece>,
    /// Largest `|σ(Q)| − |σ(Q*)|`.
    pub c_prime: usize,
    /// Largest number of generations at which `σ` changes along the chain of
    /// a sample of `F`.
    pub max_changes: usize,
}

impl Coding {
    /// `2^{(N−1)C′+1} − 1` strings of length at most `(N−1)C′`.
    pub fn piece_bound(&self, n: usize) -> f64 {
        (((n.saturating_sub(1) * self.c_prime) as f64) + 1.0).exp2() - 1.0
    }
}

fn append_case(sigma: &mut BTreeMap<usize, CodeString>, q: usize, q1: usize) {
    let a = sigma[&q].clone();
    let b = sigma[&q1].clone();
    if a.len() == b.len() {
        if a == b {
            sigma.get_mut(&q).unwrap().push(false);
            sigma.get_mut(&q1).unwrap().push(true);
        }
    } else {
        let (long, short_id, short) = if a.len() > b.len() { (a, q1, b) } else { (b, q, a) };
        // the complement of the next bit of the longer string
        let bit = !long.bits[short.len()];
        sigma.get_mut(&short_id).unwrap().push(bit);
    }
}

/// The generation-by-generation coding; pairs are visited by level
/// descending, then `Q` id, then partner id.
pub fn coding_partition(tree: &CubeTree, s: &GraphPointSet, index: &PointIndex, class: &Classification) -> Coding {
    let q0 = class.q0;
    let b2: HashSet<usize> = class.b2.iter().copied().collect();
    let mut sigma: BTreeMap<usize, CodeString> = BTreeMap::new();
    sigma.insert(q0, CodeString::default());
    let mut pairs = Vec::new();
    let mut generation = vec![q0];
    let n = s.len();
    while !generation.is_empty() {
        let mut next: Vec<usize> = generation.iter().flat_map(|&q| tree.cubes[q].children.iter().copied()).collect();
        next.sort_unstable();
        for &q in &next {
            let parent = tree.cubes[q].parent.expect("child has a parent");
            let code = sigma[&parent].clone();
            sigma.insert(q, code);
        }
        let mut owner = vec![usize::MAX; n];
        for &q in &next {
            for &i in &tree.cubes[q].members {
                owner[i] = q;
            }
        }
        for &q in next.iter().filter(|q| b2.contains(q)) {
            let ball = tree.ball_of(q);
            let inside = index.ball(ball.center, ball.radius);
            let mut partners: Vec<usize> =
                inside.iter().map(|&i| owner[i]).filter(|&c| c != usize::MAX && c != q).collect();
            partners.sort_unstable();
            partners.dedup();
            for q1 in partners {
                if tree.cubes[q1].members.iter().all(|i| inside.binary_search(i).is_ok()) {
                    append_case(&mut sigma, q, q1);
                    pairs.push((q, q1));
                }
            }
        }
        generation = next;
    }

    let mut c_prime = 0usize;
    for (&q, code) in &sigma {
        if let Some(p) = tree.cubes[q].parent.filter(|_| q != q0) {
            c_prime = c_prime.max(code.len() - sigma[&p].len());
        }
    }
    let good = class.good_samples(tree);
    let mut pieces: BTreeMap<(usize, CodeString), Vec<usize>> = BTreeMap::new();
    let mut max_changes = 0usize;
    let good_set: HashSet<usize> = good.iter().copied().collect();
    // walk each chain once, from Q₀ to the leaves
    let mut stack = vec![(q0, 0usize)];
    while let Some((q, changes)) = stack.pop() {
        let cube = &tree.cubes[q];
        if cube.children.is_empty() {
            for &i in cube.members.iter().filter(|i| good_set.contains(i)) {
                max_changes = max_changes.max(changes);
                let code = sigma[&q].clone();
                pieces.entry((code.len(), code)).or_default().push(i);
            }
        }
        for &c in &cube.children {
            let changed = usize::from(sigma[&c] != sigma[&q]);
            stack.push((c, changes + changed));
        }
    }
    let pieces = pieces
        .into_iter()
        .map(|((_, code), mut members)| {
            members.sort_unstable();
            Piece { code, members }
        })
        .collect();
    Coding { cube_codes: sigma, pairs, pieces, c_prime, max_changes }
}

/// Processed pairs whose final codes are still prefix-related; zero when the
/// coding separates every pair involving a `B₂` cube.
pub fn separation_violations(coding: &Coding) -> usize {
    coding.pairs.iter().filter(|(a, b)| !coding.cube_codes[a].separated_from(&coding.cube_codes[b])).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceCheck {
    pub code: CodeString,
    pub size: usize,
    /// Supremum of apertures `α` with `y ∉ x·C_W(α)` for all pairs; the
    /// cone test at `α*·(1 − 1e−9)` is re-run on every pair.
    pub alpha_star: f64,
    pub injective: bool,
}

/// `min ‖p_W‖/‖p_V‖` over ordered pairs, `p = x⁻¹y`.
fn critical_aperture(points: &[HPoint], w: VerticalSubgroup) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for (j, q) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let (pw, pv) = split(points[i].inv() * *q, w);
                let (a, b) = (pw.norm(), pv.norm());
                if b > 0.0 {
                    best = best.min(a / b);
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

pub fn verify_pieces(points: &[HPoint], pieces: &[Piece], w: VerticalSubgroup) -> Vec<PieceCheck> {
    pieces
        .iter()
        .map(|piece| {
            let pts: Vec<HPoint> = piece.members.iter().map(|&i| points[i]).collect();
            let mut proj: Vec<(f64, f64)> = pts.iter().map(|p| w.coords(project_w(*p, w))).collect();
            proj.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let injective =
                proj.windows(2).all(|p| dist(w.from_coords(p[0].0, p[0].1), w.from_coords(p[1].0, p[1].1)) > 0.0);
            let mut alpha = if injective { critical_aperture(&pts, w) } else { 0.0 };
            if alpha.is_infinite() {
                // a single point, or all pairs along W
                alpha = f64::MAX;
            }
            let alpha_star = if alpha > 0.0 && alpha.is_finite() {
                let cone = ConeSpec { subgroup: w, alpha: alpha * (1.0 - 1e-9) };
                let clean = (0..pts.len())
                    .into_par_iter()
                    .all(|i| pts.iter().enumerate().all(|(j, q)| i == j || !in_cone(pts[i], *q, &cone)));
                if clean {
                    alpha
                } else {
                    0.0
                }
            } else {
                0.0
            };
            PieceCheck { code: piece.code.clone(), size: pts.len(), alpha_star, injective }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub config: GoodnessConfig,
    pub raster_h: f64,
    pub q0_mass: f64,
    pub q0_area: f64,
    pub b1: usize,
    pub b2: usize,
    pub r1_mass: f64,
    pub r2_mass: f64,
    pub uncovered_area: f64,
    pub uncovered_raster_error: f64,
    pub covered_area: f64,
    pub covered_fraction: f64,
    pub pieces: Vec<PieceCheck>,
    pub c_prime: usize,
    pub max_changes: usize,
    pub piece_bound: f64,
    pub separation_violations: usize,
}

impl PartitionSummary {
    /// `L²(π_W(Q₀ ∖ ∪F_s)) ≤ b·μ(Q₀)`, allowing the raster boundary error.
    pub fn uncovered_within_budget(&self) -> bool {
        self.uncovered_area <= self.config.b * self.q0_mass + self.uncovered_raster_error
    }

    pub fn all_pieces_pass(&self) -> bool {
        self.pieces.iter().all(|p| p.injective && p.alpha_star > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOutcome {
    pub classification: Classification,
    pub coding: Coding,
    pub summary: PartitionSummary,
}

/// Classification, coding and verification for the root `q0`; betas must be
/// cached on `tree`.
pub fn run_partition(
    tree: &CubeTree,
    s: &GraphPointSet,
    index: &PointIndex,
    q0: usize,
    cfg: &GoodnessConfig,
) -> Result<PartitionOutcome> {
    let raster = Raster::calibrate(&s.points, &tree.cubes[q0].members, cfg.w)?;
    let class = classify_cubes(tree, s, index, q0, cfg, &raster)?;
    let coding = coding_partition(tree, s, index, &class);
    let checks = verify_pieces(&s.points, &coding.pieces, cfg.w);
    let q0_area = raster.area(&s.points, &tree.cubes[q0].members)?;
    let mut bad: Vec<usize> = class.r1.iter().chain(&class.r2).copied().collect();
    bad.sort_unstable();
    bad.dedup();
    let uncovered = if bad.is_empty() {
        ProjectionArea { area: 0.0, cells: 0, boundary_area: 0.0 }
    } else {
        raster.area(&s.points, &bad)?
    };
    let good = class.good_samples(tree);
    let covered = if good.is_empty() { 0.0 } else { raster.area(&s.points, &good)?.area };
    let summary = PartitionSummary {
        config: *cfg,
        raster_h: raster.h,
        q0_mass: tree.cubes[q0].mass,
        q0_area: q0_area.area,
        b1: class.b1.len(),
        b2: class.b2.len(),
        r1_mass: s.mass_of(&class.r1),
        r2_mass: s.mass_of(&class.r2),
        uncovered_area: uncovered.area,
        uncovered_raster_error: uncovered.boundary_area,
        covered_area: covered,
        covered_fraction: if q0_area.area > 0.0 { covered / q0_area.area } else { 0.0 },
        piece_bound: coding.piece_bound(cfg.n),
        separation_violations: separation_violations(&coding),
        c_prime: coding.c_prime,
        max_changes: coding.max_changes,
        pieces: checks,
    };
    Ok(PartitionOutcome { classification: class, coding, summary })
}

/// Rows `piece_id,code,x,y,t,mass`.
pub fn write_pieces_csv(w: impl Write, s: &GraphPointSet, pieces: &[Piece]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["piece_id", "code", "x", "y", "t", "mass"])?;
    for (k, piece) in pieces.iter().enumerate() {
        let code = piece.code.to_string();
        for &i in &piece.members {
            let p = s.points[i];
            wr.write_record([
                k.to_string(),
                code.clone(),
                p.x.to_string(),
                p.y.to_string(),
                p.t.to_string(),
                s.mass[i].to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubes::{build_cubes, compute_betas};
    use crate::graphs::{GridGraph, GridSpec};

    #[test]
    fn code_strings() {
        let a: CodeString = "01".parse().unwrap();
        let b: CodeString = "011".parse().unwrap();
        assert!(a.is_prefix_of(&b));
        assert!(!a.separated_from(&b));
        assert!(a.separated_from(&"1".parse().unwrap()));
        assert_eq!(serde_json::to_string(&b).unwrap(), "\"011\"");
        assert!("012".parse::<CodeString>().is_err());
    }

    #[test]
    fn case_chase() {
        let mut sigma = BTreeMap::new();
        sigma.insert(1, CodeString::default());
        sigma.insert(2, CodeString::default());
        append_case(&mut sigma, 1, 2);
        assert_eq!(sigma[&1].to_string(), "0");
        assert_eq!(sigma[&2].to_string(), "1");
        append_case(&mut sigma, 2, 1);
        assert_eq!((sigma[&1].to_string(), sigma[&2].to_string()), ("0".into(), "1".into()));
        sigma.insert(3, "0".parse().unwrap());
        sigma.insert(4, "011".parse().unwrap());
        append_case(&mut sigma, 4, 3);
        assert_eq!(sigma[&3].to_string(), "00");
    }

    #[test]
    fn plane_ball_area() {
        let h = 1.0 / 32.0;
        let n = 65;
        let grid = GridSpec::spanning(-1.0, 1.0, -1.0, 1.0, n, 2049).unwrap();
        assert!((grid.dt - h * h).abs() < 1e-15);
        let s = GridGraph::from_fn(grid, |_, _| 0.0).unwrap().to_point_set();
        let idx = PointIndex::new(&s.points);
        let r = 0.75;
        let region = idx.ball(HPoint::IDENTITY, r);
        let a = projection_area(&s.points, &region, VerticalSubgroup::yt()).unwrap();
        let want = 4.0 * r * r * r;
        assert!((a.area - want).abs() / want < 0.05, "{} vs {want}", a.area);
        assert!(projection_area(&s.points, &[], VerticalSubgroup::yt()).is_err());
    }

    #[test]
    fn affine_pipeline_is_one_piece() {
        let grid = GridSpec::spanning(-1.0, 1.0, -1.0, 1.0, 17, 65).unwrap();
        let s = GridGraph::from_fn(grid, |y, _| 0.4 * y + 0.1).unwrap().to_point_set();
        let idx = PointIndex::new(&s.points);
        let mut tree = build_cubes(&s, -2, 2).unwrap();
        compute_betas(&mut tree, &s, &idx);
        let cfg = GoodnessConfig { b: 0.5, epsilon: 0.05, n: 1, w: VerticalSubgroup::yt() };
        let out = run_partition(&tree, &s, &idx, 0, &cfg).unwrap();
        assert!(out.classification.b2.is_empty() && out.classification.r2.is_empty());
        assert_eq!(out.coding.pieces.len(), 1);
        assert!(out.coding.pieces[0].code.is_empty());
        assert!(out.summary.all_pieces_pass());
        let huge = GoodnessConfig { b: 1e6, ..cfg };
        let out = run_partition(&tree, &s, &idx, 0, &huge).unwrap();
        assert_eq!(out.classification.b1, vec![0]);
        assert!(out.coding.pieces.is_empty());
    }

    #[test]
    fn duplicate_projection_fails_graph_check() {
        let pts = vec![HPoint::new(0.0, 0.0, 0.0), HPoint::new(0.5, 0.0, 0.0)];
        let piece = Piece { code: CodeString::default(), members: vec![0, 1] };
        let c = &verify_pieces(&pts, &[piece], VerticalSubgroup::yt())[0];
        assert!(!c.injective);
        assert_eq!(c.alpha_star, 0.0);
    }
}
