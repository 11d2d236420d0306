//! Gradient fluctuation on sub-balls, thin-boundary radii and the annulus
//! estimate.

use heis_rect::beta::{annulus_control, gradient_fluctuation_probe, thin_boundary_radius, Ball};
use heis_rect::burgers::library;
use heis_rect::graphs::{GridGraph, GridSpec};
use heis_rect::heis::HPoint;

fn main() -> heis_rect::Result<()> {
    let grid = GridSpec::spanning(-0.9, 0.9, -1.5, 1.5, 73, 121)?;
    let ball = Ball::new(HPoint::IDENTITY, 0.8)?;
    let graphs = [
        ("0.4y", GridGraph::from_fn(grid, |y, _| 0.4 * y)?),
        ("t/(y+1)", GridGraph::from_fn(grid, library::t_over_y_plus_one)?),
        ("|y|", GridGraph::from_fn(grid, library::abs_y)?),
    ];
    for (name, g) in &graphs {
        let p = gradient_fluctuation_probe(g, &ball, 0.125)?;
        println!(
            "{name:>8}: gap {:.4} on B({:.3},{:.3},{:.3}; {}) (averages {:.4} vs {:.4})",
            p.gap,
            p.sub_ball.center.x,
            p.sub_ball.center.y,
            p.sub_ball.center.t,
            p.sub_ball.radius,
            p.sub_average,
            p.whole_average
        );
    }

    let plane = GridGraph::from_fn(grid, |_, _| 0.0)?;
    let set = plane.to_point_set();
    for r in [0.2, 0.3, 0.4] {
        let tb = thin_boundary_radius(&set, HPoint::IDENTITY, r, 0.2)?;
        println!("r = {r}: thin radius {:.4}, constant {:.3}", tb.s, tb.a);
    }
    let f: Vec<f64> = (0..grid.len()).map(|k| (k as f64 * 0.37).sin()).collect();
    let (lhs, rhs) = annulus_control(&plane, HPoint::IDENTITY, 0.3, 0.5, &f)?;
    println!("annulus: {lhs:.4} <= {rhs:.4}");
    Ok(())
}
