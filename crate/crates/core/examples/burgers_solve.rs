//! Constant-gradient graphs from characteristic data, and a crossing.

use heis_rect::burgers::{library, solve_cg, verify_along_characteristics, CGSpec, Domain, PiecewiseLinear};
use heis_rect::graphs::GridSpec;
use heis_rect::Error;

fn main() -> heis_rect::Result<()> {
    let grid = GridSpec::spanning(-0.5, 0.5, -1.0, 1.0, 65, 129)?;
    let domain = Domain { y: [-0.5, 0.5], t: [-1.0, 1.0] };

    let spec = CGSpec::new(0.0, PiecewiseLinear::linear(1.0, 0.0), domain)?;
    let g = solve_cg(&spec, grid)?;
    let err = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.node(k);
            (g.phi[k] - library::t_over_y_plus_one(grid.y(i), grid.t(j))).abs()
        })
        .fold(0.0, f64::max);
    println!("c = 0, g(t) = t: max |phi - t/(y+1)| = {err:.2e}");
    println!("  residual along characteristics {:.2e}", verify_along_characteristics(&g, &spec));

    let spec = CGSpec::new(0.8, PiecewiseLinear::sample(-3.0, 3.0, 9, |t| 0.3 * t.sin())?, domain)?;
    let g = solve_cg(&spec, grid)?;
    println!("c = 0.8, g = 0.3 sin t: residual {:.2e}", verify_along_characteristics(&g, &spec));

    let focusing = CGSpec::new(0.0, PiecewiseLinear::linear(-1.0, 0.0), Domain { y: [0.0, 1.5], t: [-1.0, 1.0] })?;
    match solve_cg(&focusing, GridSpec::spanning(0.0, 1.5, -1.0, 1.0, 31, 41)?) {
        Err(Error::CrossingDetected { s, t1, t2 }) => {
            println!("g(t) = -t: characteristics from t = {t1}, {t2} meet at s = {s}")
        }
        other => println!("g(t) = -t: unexpected {other:?}"),
    }
    Ok(())
}
