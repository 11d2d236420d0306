//! David-style cubes on a perturbed graph and the Carleson sums of the cubes
//! whose β exceeds each threshold.

use heis_rect::cubes::{carleson_sum, check_invariants};
use heis_rect::index::PointIndex;
use heis_rect::scenarios::{cube_tree, materialize, ExperimentConfig, Scenario};

fn main() -> heis_rect::Result<()> {
    let cfg = ExperimentConfig {
        scenario: Scenario::Perturbed { slope: 0.5, amplitude: 0.05, frequency: 4.0 },
        epsilons: vec![0.005, 0.01, 0.02, 0.05, 0.1],
        ..Default::default()
    };
    let s = materialize(&cfg)?.set;
    let index = PointIndex::new(&s.points);
    let tree = cube_tree(&cfg, &s, &index, false)?;
    println!("{} samples, {} cubes on levels {}..{}", s.len(), tree.cubes.len(), tree.j_min, tree.j_max);
    for j in (tree.j_min..=tree.j_max).rev() {
        let betas: Vec<f64> = tree.level(j).iter().filter_map(|&q| tree.cubes[q].beta).collect();
        let max = betas.iter().cloned().fold(0.0, f64::max);
        println!("  level {j:>3}: {:>5} cubes, max beta {max:.5}", betas.len());
    }
    let inv = check_invariants(&tree, &s, &index)?;
    println!("inner-ball constant {:.4}, mass error {:.1e}", inv.inner_ball_constant, inv.max_mass_error);
    let rep = carleson_sum(&tree, &cfg.epsilons, None)?;
    for (e, k) in rep.epsilons.iter().zip(&rep.sup) {
        println!("sup K({e}) = {k:.3}");
    }
    Ok(())
}
