//! Refinement of pre-dyadic ball families into dyadic ones.
//!
//! Balls are compared through the samples they contain: two balls intersect
//! when they share a sample, and `B` meets the boundary of `B'` when it has
//! samples both inside and outside `B'`.

use serde::{Deserialize, Serialize};

use crate::beta::Ball;
use crate::error::{Error, Result};
use crate::graphs::GraphPointSet;
use crate::index::PointIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredyadicBall {
    pub ball: Ball,
    pub thinness: f64,
    pub sub_balls: Vec<Ball>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    /// Input indices of the kept balls, largest band first.
    pub selected: Vec<usize>,
    /// Band base `N ≥ 2/δ`.
    pub base: f64,
    /// 0 when the even bands were kept, 1 for the odd ones.
    pub parity: u8,
    pub band_of: Vec<i32>,
    pub retained_fraction: f64,
    /// Largest number of same-band input balls sharing a sample.
    pub max_overlap: usize,
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|i| b.binary_search(i).is_ok())
}

fn meets(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|i| b.binary_search(i).is_ok())
}

/// `B` has samples inside and outside `B'`.
fn crosses_boundary(b: &[usize], bp: &[usize]) -> bool {
    meets(b, bp) && !is_subset(b, bp)
}

/// Whether every pair of sample sets is disjoint or nested.
pub fn is_dyadic(sets: &[Vec<usize>]) -> bool {
    for (k, a) in sets.iter().enumerate() {
        for b in &sets[k + 1..] {
            if meets(a, b) && !is_subset(a, b) && !is_subset(b, a) {
                return false;
            }
        }
    }
    true
}

pub fn refine_predyadic(
    balls: &[PredyadicBall],
    s: &GraphPointSet,
    index: &PointIndex,
    delta: f64,
) -> Result<Refinement> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Config(format!("delta must lie in (0, 1], got {delta}")));
    }
    if balls.is_empty() {
        return Err(Error::Empty("ball family"));
    }
    let members: Vec<Vec<usize>> = balls.iter().map(|b| index.ball(b.ball.center, b.ball.radius)).collect();
    let subs: Vec<Vec<Vec<usize>>> =
        balls.iter().map(|b| b.sub_balls.iter().map(|sb| index.ball(sb.center, sb.radius)).collect()).collect();
    for (k, b) in balls.iter().enumerate() {
        for (a, sb) in b.sub_balls.iter().enumerate() {
            if sb.radius < delta * b.ball.radius * (1.0 - 1e-12) {
                return Err(Error::Hypothesis(format!("sub-ball {a} of ball {k} is smaller than δ·r")));
            }
            if !is_subset(&subs[k][a], &members[k]) {
                return Err(Error::Hypothesis(format!("sub-ball {a} of ball {k} leaves its ball")));
            }
            for c in &subs[k][a + 1..] {
                if meets(&subs[k][a], c) {
                    return Err(Error::Hypothesis(format!("sub-balls of ball {k} overlap")));
                }
            }
        }
    }

    let base = (2.0 / delta).max(2.0);
    let band_of: Vec<i32> = balls.iter().map(|b| ((2.0 * b.ball.radius).ln() / base.ln()).floor() as i32 + 1).collect();
    let mut bands: Vec<i32> = band_of.clone();
    bands.sort_unstable();
    bands.dedup();

    let mut max_overlap = 0usize;
    let mut kept: Vec<usize> = Vec::new();
    for &band in &bands {
        let mut ids: Vec<usize> = (0..balls.len()).filter(|&k| band_of[k] == band).collect();
        let mut count = vec![0usize; s.len()];
        for &k in &ids {
            for &i in &members[k] {
                count[i] += 1;
            }
        }
        max_overlap = max_overlap.max(count.into_iter().max().unwrap_or(0));
        // 5r-covering: largest radius first, then input order
        ids.sort_by(|&a, &b| balls[b].ball.radius.total_cmp(&balls[a].ball.radius).then(a.cmp(&b)));
        let mut chosen: Vec<usize> = Vec::new();
        for k in ids {
            if chosen.iter().all(|&c| !meets(&members[k], &members[c])) {
                chosen.push(k);
            }
        }
        kept.extend(chosen);
    }

    let mass = |k: usize| s.mass_of(&members[k]);
    let even: f64 = kept.iter().filter(|&&k| band_of[k].rem_euclid(2) == 0).map(|&k| mass(k)).sum();
    let odd: f64 = kept.iter().filter(|&&k| band_of[k].rem_euclid(2) == 1).map(|&k| mass(k)).sum();
    let parity = if even >= odd { 0 } else { 1 };

    let mut good: Vec<Vec<usize>> = Vec::new();
    let mut selected = Vec::new();
    for &band in bands.iter().rev().filter(|b| b.rem_euclid(2) == parity as i32) {
        let mut layer: Vec<usize> = kept.iter().copied().filter(|&k| band_of[k] == band).collect();
        layer.sort_unstable();
        let survivors: Vec<usize> =
            layer.into_iter().filter(|&k| good.iter().all(|g| !crosses_boundary(&members[k], g))).collect();
        for &k in &survivors {
            good.push(members[k].clone());
            good.extend(subs[k].iter().cloned());
            selected.push(k);
        }
    }
    let total: f64 = (0..balls.len()).map(mass).sum();
    let retained: f64 = selected.iter().map(|&k| mass(k)).sum();
    Ok(Refinement {
        selected,
        base,
        parity,
        band_of,
        retained_fraction: if total > 0.0 { retained / total } else { 0.0 },
        max_overlap,
    })
}

/// Condition (ii): when `B_j ⊂ B_{j'}`, `B_j` misses or sits inside each
/// sub-ball of `B_{j'}`.
pub fn satisfies_sub_ball_condition(balls: &[PredyadicBall], index: &PointIndex, selected: &[usize]) -> bool {
    let members: Vec<Vec<usize>> =
        selected.iter().map(|&k| index.ball(balls[k].ball.center, balls[k].ball.radius)).collect();
    for a in 0..selected.len() {
        for (b, &kb) in selected.iter().enumerate() {
            if a == b || !is_subset(&members[a], &members[b]) {
                continue;
            }
            for sb in &balls[kb].sub_balls {
                let sm = index.ball(sb.center, sb.radius);
                if meets(&members[a], &sm) && !is_subset(&members[a], &sm) {
                    return false;
                }
            }
        }
    }
    true
}
