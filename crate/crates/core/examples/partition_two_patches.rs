//! Splits the union of two crossing graph patches into intrinsic Lipschitz
//! pieces and checks each piece.

use heis_rect::cubes::{build_cubes, compute_betas, default_j_max, finest_j_min};
use heis_rect::index::PointIndex;
use heis_rect::partition::{choose_n, run_partition, GoodnessConfig};
use heis_rect::planes::VerticalSubgroup;
use heis_rect::scenarios::{materialize, ExperimentConfig, Scenario};

fn main() -> heis_rect::Result<()> {
    let cfg = ExperimentConfig { scenario: Scenario::TwoPatchUnion { slope: 0.5 }, ..Default::default() };
    let sample = materialize(&cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let j_min = finest_j_min(&s.points).unwrap_or(-3);
    let mut tree = build_cubes(s, j_min, default_j_max(&s.points))?;
    compute_betas(&mut tree, s, &index);
    let n = choose_n(&tree, s, &index, 0, cfg.b, cfg.epsilon)?;
    let goodness = GoodnessConfig { b: cfg.b, epsilon: cfg.epsilon, n, w: VerticalSubgroup::yt() };
    let out = run_partition(&tree, s, &index, 0, &goodness)?;
    let sm = &out.summary;
    println!("samples {}  cubes {}  levels {}..{}  N {}", s.len(), tree.cubes.len(), tree.j_min, tree.j_max, n);
    println!(
        "B1 {}  B2 {}  R1 mass {:.4}  R2 mass {:.4}  Q0 mass {:.4}",
        sm.b1, sm.b2, sm.r1_mass, sm.r2_mass, sm.q0_mass
    );
    println!(
        "uncovered area {:.4} (+/- {:.4}) vs b*mu(Q0) {:.4}; covered fraction {:.3}",
        sm.uncovered_area,
        sm.uncovered_raster_error,
        sm.config.b * sm.q0_mass,
        sm.covered_fraction
    );
    println!("C' {}  max changes {}  separation violations {}", sm.c_prime, sm.max_changes, sm.separation_violations);
    let largest = sm.pieces.iter().map(|p| p.size).max().unwrap_or(0);
    let alpha = sm.pieces.iter().map(|p| p.alpha_star).fold(f64::INFINITY, f64::min);
    println!(
        "{} pieces, largest {largest}, smallest alpha* {alpha:.4}, all pass {}",
        sm.pieces.len(),
        sm.all_pieces_pass()
    );
    for p in sm.pieces.iter().filter(|p| p.size == largest) {
        println!(
            "piece {:>8}  size {:>6}  injective {}  alpha* {:.4}",
            p.code.to_string(),
            p.size,
            p.injective,
            p.alpha_star
        );
    }
    Ok(())
}
