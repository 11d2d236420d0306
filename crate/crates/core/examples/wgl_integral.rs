//! Dyadic estimate of the WGL double integral around sample points, next to
//! the bound coming from the cube β values.

use heis_rect::cubes::{wgl_cube_bound, wgl_integral_estimate, wgl_scales};
use heis_rect::index::PointIndex;
use heis_rect::scenarios::{ball_centers, cube_tree, materialize, ExperimentConfig, Scenario};

fn main() -> heis_rect::Result<()> {
    let cfg = ExperimentConfig {
        scenario: Scenario::Perturbed { slope: 0.5, amplitude: 0.05, frequency: 4.0 },
        ..Default::default()
    };
    let s = materialize(&cfg)?.set;
    let index = PointIndex::new(&s.points);
    let tree = cube_tree(&cfg, &s, &index, false)?;
    let s_min = 2f64.powi(tree.j_min);
    println!("{:>8} {:>8} {:>6} {:>12} {:>12}", "R", "eps", "scales", "estimate", "cube bound");
    for x in ball_centers(&cfg, &s, 2) {
        for r in [0.5, 1.0] {
            let scales = wgl_scales(r, s_min);
            for eps in [0.01, 0.02, 0.05] {
                let est = wgl_integral_estimate(&s, &index, eps, x, r, s_min)?;
                let bound = wgl_cube_bound(&tree, eps, &scales)?;
                println!("{r:>8} {eps:>8} {:>6} {est:>12.5} {bound:>12.5}", scales.len());
            }
        }
    }
    Ok(())
}
