//! β_CG upper bounds: distance from a graph to the best constant-gradient
//! candidate on a ball, as the number of knots in the candidate data grows.

use heis_rect::beta::{beta_cg_sweep, beta_vertical, Ball, BetaCgConfig};
use heis_rect::graphs::{GridGraph, GridSpec};
use heis_rect::heis::HPoint;

fn main() -> heis_rect::Result<()> {
    let grid = GridSpec::spanning(-0.5, 0.5, -0.5, 0.5, 41, 41)?;
    let ball = Ball::new(HPoint::IDENTITY, 0.4)?;
    let graphs = [
        ("0.7y + 0.1", GridGraph::from_fn(grid, |y, _| 0.7 * y + 0.1)?),
        ("t/(y+1)", GridGraph::from_fn(grid, |y, t| t / (y + 1.0))?),
        ("0.3 sin 5y + 0.2 t^2", GridGraph::from_fn(grid, |y, t| 0.3 * (5.0 * y).sin() + 0.2 * t * t)?),
    ];
    for (name, g) in &graphs {
        let plane = beta_vertical(&g.to_point_set().points, &ball)?.beta;
        println!("{name}: vertical beta {plane:.5}");
        let ks = [2, 3, 5, 9];
        for (k, e) in ks.iter().zip(beta_cg_sweep(g, &ball, 5.0, &ks, &BetaCgConfig::default())?) {
            println!("  knots {k:>2}  beta_cg {:.6}  c {:+.4}  L {:.3}", e.value, e.c, e.lipschitz);
        }
    }
    Ok(())
}
