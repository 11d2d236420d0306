//! Vertical β-numbers by rotating calipers, checked against a brute-force
//! direction scan, on a graph sample and on the unit square.

use heis_rect::beta::{beta_of_members, beta_vertical, beta_vertical_brute, Ball};
use heis_rect::heis::HPoint;
use heis_rect::index::PointIndex;
use heis_rect::scenarios::{ball_centers, materialize, ExperimentConfig, Scenario};

fn main() -> heis_rect::Result<()> {
    let square: Vec<HPoint> =
        [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)].map(|(x, y)| HPoint::new(x, y, 0.0)).to_vec();
    let ball = Ball::new(HPoint::new(0.5, 0.5, 0.0), 2.0)?;
    println!("unit square, r = 2: beta = {}", beta_vertical(&square, &ball)?.beta);

    let cfg = ExperimentConfig {
        scenario: Scenario::Perturbed { slope: 0.5, amplitude: 0.05, frequency: 4.0 },
        ..Default::default()
    };
    let s = materialize(&cfg)?.set;
    let index = PointIndex::new(&s.points);
    println!("{:>10} {:>10} {:>10} {:>12} {:>12}", "y", "t", "r", "calipers", "brute(720)");
    for c in ball_centers(&cfg, &s, 5) {
        for r in [0.125, 0.25, 0.5] {
            let ball = Ball::new(c, r)?;
            let fast = beta_of_members(&s.points, &index.ball(c, r), &ball)?;
            let slow = beta_vertical_brute(&s.points, &ball, 720)?;
            println!("{:>10.4} {:>10.4} {:>10.4} {:>12.6} {:>12.6}", c.y, c.t, r, fast.beta, slow.beta);
        }
    }
    Ok(())
}
