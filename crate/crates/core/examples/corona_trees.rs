//! Pre-dyadic refinement of a ball family and the corona decomposition of a
//! cube tree into trees of low-β cubes.

use heis_rect::beta::Ball;
use heis_rect::corona::{check_corona, corona_partition};
use heis_rect::cubes::{build_cubes, compute_betas, default_j_max};
use heis_rect::graphs::{GridGraph, GridSpec};
use heis_rect::heis::HPoint;
use heis_rect::index::PointIndex;
use heis_rect::predyadic::{refine_predyadic, PredyadicBall};

fn main() -> heis_rect::Result<()> {
    let grid = GridSpec::spanning(-2.0, 2.0, -4.0, 4.0, 81, 321)?;
    let plane = GridGraph::from_fn(grid, |_, _| 0.0)?.to_point_set();
    let index = PointIndex::new(&plane.points);
    let mut balls = Vec::new();
    for (k, r) in [1.2, 0.6, 0.3, 0.15].iter().enumerate() {
        for m in 0..4 {
            let center = HPoint::new(0.0, -1.5 + 0.9 * m as f64 + 0.05 * k as f64, 0.1 * k as f64);
            let ball = Ball { center, radius: *r };
            balls.push(PredyadicBall { ball, thinness: 1.0, sub_balls: vec![Ball { center, radius: 0.5 * r }] });
        }
    }
    let refined = refine_predyadic(&balls, &plane, &index, 0.5)?;
    println!(
        "pre-dyadic: kept {:?} of {} balls (base {}, parity {}), mass fraction {:.3}, max overlap {}",
        refined.selected,
        balls.len(),
        refined.base,
        refined.parity,
        refined.retained_fraction,
        refined.max_overlap
    );

    let grid = GridSpec::spanning(-1.0, 1.0, -1.0, 1.0, 33, 257)?;
    let s = GridGraph::from_fn(grid, |y, _| 0.3 * y + 0.15 * (6.0 * y).sin())?.to_point_set();
    let index = PointIndex::new(&s.points);
    let mut tree = build_cubes(&s, -3, default_j_max(&s.points))?;
    compute_betas(&mut tree, &s, &index);
    let eps = 0.05;
    let member = |q: usize| tree.cubes[q].beta.unwrap_or(f64::INFINITY) <= eps;
    let root = tree.levels[0][0];
    let corona = corona_partition(&tree, root, member);
    check_corona(&tree, &corona, member)?;
    println!("corona with beta <= {eps}: {} trees", corona.trees.len());
    for t in corona.trees.iter().take(8) {
        let q = &tree.cubes[t.root];
        println!("  root {} (level {}), {} cubes, {} stopping", t.root, q.level, t.cubes.len(), t.stop.len());
    }
    println!("root packing {:.3}, max multiplicity {}", corona.root_packing, corona.max_prime_multiplicity);
    Ok(())
}
