//! Invariant suites shared by the `verify` subcommand and the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beta::{annulus_control, beta_of_members, beta_vertical_brute, Ball};
use crate::cubes::{carleson_sum, check_invariants, sibling_pair, sibling_pair_holds, CarlesonReport, CubeTree};
use crate::graphs::{intrinsic_gradient, lipschitz_constant, GraphPointSet, GridGraph};
use crate::heis::{dilate, dist, rotate, HPoint};
use crate::index::PointIndex;
use crate::planes::{shear_jacobian_det, split, VerticalSubgroup};
use crate::scenarios::{ball_centers, cube_tree, materialize, ExperimentConfig, Scenario};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    /// Worst normalised error; a suite passes when this is at most 1.
    pub worst: f64,
    pub note: String,
}

impl SuiteReport {
    fn new(name: &str, checked: usize, worst: f64, note: impl Into<String>) -> Self {
        SuiteReport { name: name.into(), passed: worst <= 1.0, checked, worst, note: note.into() }
    }
}

fn rand_point(rng: &mut ChaCha8Rng, a: f64) -> HPoint {
    HPoint::new(rng.gen_range(-a..a), rng.gen_range(-a..a), rng.gen_range(-a..a))
}

/// Associativity, left invariance, homogeneity, rotations and the triangle
/// inequality on `n` random tuples; `worst` is the largest error divided by
/// its tolerance.
pub fn group_suite(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (p, q, r, g) = (
            rand_point(&mut rng, 10.0),
            rand_point(&mut rng, 10.0),
            rand_point(&mut rng, 10.0),
            rand_point(&mut rng, 10.0),
        );
        let a = (p * q) * r;
        let b = p * (q * r);
        let scale = 1.0 + [p, q, r].iter().map(|x| x.max_abs()).fold(0.0, f64::max);
        let diff = HPoint::new(a.x - b.x, a.y - b.y, a.t - b.t).max_abs();
        worst = worst.max(diff / (1e-12 * scale * scale));
        let d = dist(p, q);
        worst = worst.max((dist(g * p, g * q) - d).abs() / (1e-9 * d.max(1e-300)));
        let s = 10f64.powf(rng.gen_range(-3.0..3.0));
        if let (Ok(dp), Ok(dq)) = (dilate(s, p), dilate(s, q)) {
            worst = worst.max((dist(dp, dq) - s * d).abs() / (1e-9 * s * d));
        }
        let th = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        worst = worst.max((dist(rotate(th, p), rotate(th, q)) - d).abs() / (1e-12 * scale * scale));
        let (rp, rq) = (rotate(th, p * q), rotate(th, p) * rotate(th, q));
        worst = worst.max(HPoint::new(rp.x - rq.x, rp.y - rq.y, rp.t - rq.t).max_abs() / (1e-12 * scale * scale));
        let tri = dist(p, r) - dist(p, q) - dist(q, r);
        worst = worst.max(tri / (1e-12 * scale));
    }
    SuiteReport::new("group", n, worst, "errors relative to the stated tolerances")
}

/// `p = p_W·p_V` recomposition and the unit Jacobian of `P_p`.
pub fn splitting_suite(n: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..n {
        let p = rand_point(&mut rng, 10.0);
        let w = VerticalSubgroup::new(rng.gen_range(0.0..std::f64::consts::PI));
        let (pw, pv) = split(p, w);
        let back = pw * pv;
        let err = HPoint::new(back.x - p.x, back.y - p.y, back.t - p.t).max_abs();
        worst = worst.max(err / (1e-10 * (1.0 + p.max_abs())));
        if k % 10 == 0 {
            let det = shear_jacobian_det(p, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), w, 1e-3);
            worst = worst.max((det - 1.0).abs() / 1e-8);
        }
    }
    SuiteReport::new("splitting", n, worst, "recomposition within 1e-10, |det - 1| within 1e-8")
}

/// Calipers against the 720-direction grid on the given balls.
pub fn beta_oracle_suite(s: &GraphPointSet, index: &PointIndex, balls: &[Ball]) -> SuiteReport {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for b in balls {
        let members = index.ball(b.center, b.radius);
        let (Ok(fast), Ok(brute)) = (beta_of_members(&s.points, &members, b), beta_vertical_brute(&s.points, b, 720))
        else {
            continue;
        };
        let pts: Vec<HPoint> = members.iter().map(|&i| s.points[i]).collect();
        let diam = pts.iter().flat_map(|p| pts.iter().map(move |q| dist(*p, *q))).fold(0.0, f64::max);
        let tol = 1e-6f64.max(std::f64::consts::PI / 720.0 * diam / b.radius);
        // brute force is an upper bound; it may exceed the exact value by tol
        let gap = brute.beta - fast.beta;
        worst = worst.max(if gap < -1e-12 { f64::INFINITY } else { gap / tol });
        checked += 1;
    }
    SuiteReport::new("beta_oracle", checked, worst, "calipers vs 720 directions")
}

/// Exact cube invariants plus the sibling-pair property on random pairs.
pub fn cube_suite(tree: &CubeTree, s: &GraphPointSet, index: &PointIndex, pairs: usize, seed: u64) -> SuiteReport {
    let inv = match check_invariants(tree, s, index) {
        Ok(inv) => inv,
        Err(e) => {
            return SuiteReport {
                name: "cubes".into(),
                passed: false,
                checked: 0,
                worst: f64::INFINITY,
                note: e.to_string(),
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed = 0usize;
    let mut tried = 0usize;
    for _ in 0..pairs {
        let (x, y) = (rng.gen_range(0..s.len()), rng.gen_range(0..s.len()));
        if let Some(pair) = sibling_pair(tree, s, x, y) {
            tried += 1;
            if !sibling_pair_holds(tree, s, &pair) {
                failed += 1;
            }
        }
    }
    let mut report = SuiteReport::new(
        "cubes",
        tree.cubes.len() + tried,
        if failed == 0 && inv.inner_ball_constant > 0.0 { 0.0 } else { f64::INFINITY },
        format!(
            "inner-ball c = {:.4}, regularity in [{:.4}, {:.4}], {tried} sibling pairs, {failed} failures",
            inv.inner_ball_constant, inv.regularity_lower, inv.regularity_upper
        ),
    );
    report.passed = report.worst <= 1.0;
    report
}

/// `K(ε)` nonincreasing in ε, non-negative, and zero when `flat`.
pub fn carleson_suite(rep: &CarlesonReport, flat: bool) -> SuiteReport {
    let mut ok = rep.rows.iter().all(|r| r.k >= 0.0);
    let mut order: Vec<usize> = (0..rep.epsilons.len()).collect();
    order.sort_by(|&a, &b| rep.epsilons[a].total_cmp(&rep.epsilons[b]));
    let by_root = |e: f64| -> std::collections::BTreeMap<usize, f64> {
        rep.rows.iter().filter(|r| r.epsilon == e).map(|r| (r.root_id, r.k)).collect()
    };
    for w in order.windows(2) {
        let (lo, hi) = (by_root(rep.epsilons[w[0]]), by_root(rep.epsilons[w[1]]));
        ok &= hi.iter().all(|(q, k)| lo.get(q).map_or(true, |k0| *k <= *k0));
    }
    if flat {
        ok &= rep.sup.iter().all(|k| *k == 0.0);
    }
    SuiteReport::new("carleson", rep.rows.len(), if ok { 0.0 } else { f64::INFINITY }, format!("sup K = {:?}", rep.sup))
}

/// `‖∇^φφ‖∞ ≤ L̂ + 10·Δ` with `Δ = max(Δy, √Δt)`.
pub fn gradient_bound_suite(g: &GridGraph) -> SuiteReport {
    let grad = match intrinsic_gradient(g) {
        Ok(v) => v,
        Err(e) => {
            return SuiteReport {
                name: "gradient_bound".into(),
                passed: false,
                checked: 0,
                worst: f64::INFINITY,
                note: e.to_string(),
            }
        }
    };
    let sup = grad.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let l = lipschitz_constant(&g.to_point_set());
    let delta = g.grid.dy.max(g.grid.dt.sqrt());
    let slack = l + 10.0 * delta;
    SuiteReport::new(
        "gradient_bound",
        grad.len(),
        if slack > 0.0 { sup / slack } else { sup },
        format!("sup |grad| = {sup:.6}, L = {l:.6}"),
    )
}

/// Annulus estimate with constant 2 on concentric balls around `centers`.
pub fn annulus_suite(g: &GridGraph, centers: &[HPoint], seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<f64> = (0..g.grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &c in centers {
        for (s1, s2) in [(0.2, 0.25), (0.25, 0.5), (0.4, 0.45)] {
            if let Ok((lhs, rhs)) = annulus_control(g, c, s1, s2, &f) {
                worst = worst.max(if rhs > 0.0 {
                    lhs / rhs
                } else if lhs > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                });
                checked += 1;
            }
        }
    }
    SuiteReport::new("annulus", checked, worst, "ratio of the two sides")
}

/// All suites on the configured scenario, written as `verify.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub carleson: CarlesonReport,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Runs every suite; `tuples` sets the size of the algebraic suites.
pub fn run_verify(cfg: &ExperimentConfig, tuples: usize) -> Result<VerifyReport> {
    let sample = materialize(cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let mut suites = vec![group_suite(tuples, cfg.seed), splitting_suite(tuples, cfg.seed.wrapping_add(1))];
    let centers = ball_centers(cfg, s, cfg.ball_samples);
    let balls: Vec<Ball> =
        centers.iter().flat_map(|&c| cfg.radii.iter().map(move |&r| Ball { center: c, radius: r })).collect();
    suites.push(beta_oracle_suite(s, &index, &balls));
    let tree = cube_tree(cfg, s, &index, false)?;
    suites.push(cube_suite(&tree, s, &index, 1000, cfg.seed.wrapping_add(2)));
    let carleson = carleson_sum(&tree, &cfg.epsilons, None)?;
    let flat = matches!(cfg.scenario, Scenario::Affine { .. });
    suites.push(carleson_suite(&carleson, flat));
    if let Some(g) = &sample.graph {
        suites.push(gradient_bound_suite(g));
        let inner: Vec<HPoint> = centers.iter().copied().take(4).collect();
        suites.push(annulus_suite(g, &inner, cfg.seed.wrapping_add(3)));
    }
    Ok(VerifyReport { scenario: cfg.scenario.name().to_string(), seed: cfg.seed, suites, carleson })
}
