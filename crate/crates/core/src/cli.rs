//! Command-line driver. Every subcommand reads an [`ExperimentConfig`],
//! applies flag overrides and writes its artifacts under `--out`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::beta::{beta_cg_estimate_with, beta_of_members, Ball, BetaCgConfig};
use crate::burgers::{library, solve_cg, verify_along_characteristics, CGSpec};
use crate::cubes::{carleson_sum, check_invariants, wgl_cube_bound, wgl_integral_estimate, wgl_scales};
use crate::error::{Error, Result};
use crate::graphs::lipschitz_constant;
use crate::index::PointIndex;
use crate::io;
use crate::partition::{choose_n, run_partition, write_pieces_csv, GoodnessConfig};
use crate::planes::VerticalSubgroup;
use crate::scenarios::{ball_centers, cube_tree, materialize, ExperimentConfig, Scenario};
use crate::verify::run_verify;

#[derive(Debug, Parser)]
#[command(name = "heis-rect", version, about = "Rectifiability experiments in the first Heisenberg group")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON experiment config; flags below override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Scenario name (affine, burgers_cg, example_tys, perturbed, two_patch_union).
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, env = "HEIS_RECT_THREADS")]
    pub threads: Option<usize>,
    /// Comma-separated β thresholds.
    #[arg(long, global = true, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Cube levels as `jmin:jmax`.
    #[arg(long, global = true, value_parser = parse_scales, allow_hyphen_values = true)]
    pub scales: Option<(i32, i32)>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Write the scenario's samples.
    Generate,
    /// β over balls centred at sampled points; β_CG on a few of them.
    Beta,
    /// Cube tree, Carleson sums and cube invariants.
    Cubes,
    /// Dyadic estimates of the WGL integral against the cube bound.
    Wgl,
    /// Solve for a constant-gradient graph and report residuals.
    Burgers,
    /// Split the samples into intrinsic Lipschitz pieces.
    Partition,
    /// Run the invariant suites; exits 4 when one fails.
    Verify,
}

fn parse_scales(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected jmin:jmax")?;
    let a: i32 = a.trim().parse().map_err(|e| format!("jmin: {e}"))?;
    let b: i32 = b.trim().parse().map_err(|e| format!("jmax: {e}"))?;
    if a > b {
        return Err("jmin must not exceed jmax".into());
    }
    Ok((a, b))
}

impl Common {
    /// Config file (or defaults) with the flag overrides applied.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_reader(File::open(p)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.scenario {
            if cfg.scenario.name() != name {
                cfg.scenario = Scenario::by_name(name)?;
            }
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(e) = &self.epsilons {
            cfg.epsilons = e.clone();
        }
        if self.scales.is_some() {
            cfg.scales = self.scales;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

/// Runs one subcommand; `Ok(false)` means the verify suites failed.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    fs::create_dir_all(out)?;
    match command {
        Command::Generate => generate(cfg, out).map(|_| true),
        Command::Beta => beta(cfg, out).map(|_| true),
        Command::Cubes => cubes(cfg, out).map(|_| true),
        Command::Wgl => wgl(cfg, out).map(|_| true),
        Command::Burgers => burgers(cfg, out).map(|_| true),
        Command::Partition => partition(cfg, out).map(|_| true),
        Command::Verify => {
            let rep = run_verify(cfg, 10_000)?;
            write_json(out, "verify.json", &rep)?;
            Ok(rep.passed())
        }
    }
}

fn generate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sample = materialize(cfg)?;
    let file = match &sample.graph {
        Some(g) => {
            io::write_grid_graph(create(out, "graph.csv")?, g)?;
            "graph.csv"
        }
        None => {
            io::write_points(create(out, "points.csv")?, &sample.set)?;
            "points.csv"
        }
    };
    write_json(
        out,
        "manifest.json",
        &json!({
            "config": cfg,
            "file": file,
            "samples": sample.set.len(),
            "total_mass": sample.set.total_mass(),
            "provenance": sample.set.provenance,
        }),
    )
}

fn beta(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sample = materialize(cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let centers = ball_centers(cfg, s, cfg.ball_samples);
    let mut records = Vec::new();
    for &c in &centers {
        for &r in &cfg.radii {
            let ball = Ball::new(c, r)?;
            records.push(beta_of_members(&s.points, &index.ball(c, r), &ball)?);
        }
    }
    io::write_beta_records(create(out, "beta.csv")?, &records)?;
    if let Some(g) = &sample.graph {
        let bc = BetaCgConfig { knots: cfg.knots, starts: cfg.starts, max_iter: cfg.max_iter, seed: cfg.seed };
        let mut wr = csv::Writer::from_writer(create(out, "beta_cg.csv")?);
        wr.write_record(["cx", "cy", "ct", "r", "beta", "beta_cg", "c", "lipschitz", "converged"])?;
        let r = cfg.radii[0];
        for &c in centers.iter().take(4) {
            let ball = Ball::new(c, r)?;
            let b = beta_of_members(&s.points, &index.ball(c, r), &ball)?.beta;
            match beta_cg_estimate_with(g, &ball, cfg.lipschitz_bound, &bc, None) {
                Ok(e) => wr.write_record([
                    c.x.to_string(),
                    c.y.to_string(),
                    c.t.to_string(),
                    r.to_string(),
                    b.to_string(),
                    e.value.to_string(),
                    e.c.to_string(),
                    e.lipschitz.to_string(),
                    e.converged.to_string(),
                ])?,
                // balls reaching past the grid have no candidate to compare against
                Err(Error::Coverage { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        wr.flush()?;
    }
    Ok(())
}

fn cubes(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sample = materialize(cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let tree = cube_tree(cfg, s, &index, false)?;
    tree.write_json(create(out, "cubes.json")?)?;
    carleson_sum(&tree, &cfg.epsilons, None)?.write_csv(create(out, "carleson.csv")?)?;
    write_json(out, "cube_invariants.json", &check_invariants(&tree, s, &index)?)
}

fn wgl(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sample = materialize(cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let tree = cube_tree(cfg, s, &index, false)?;
    let s_min = 2f64.powi(tree.j_min);
    let mut wr = csv::Writer::from_writer(create(out, "wgl.csv")?);
    wr.write_record(["cx", "cy", "ct", "R", "epsilon", "scales", "estimate", "cube_bound"])?;
    for &c in &ball_centers(cfg, s, cfg.ball_samples.min(4)) {
        for &r in &cfg.radii {
            let scales = wgl_scales(r, s_min);
            for &eps in &cfg.epsilons {
                let est = if scales.is_empty() { 0.0 } else { wgl_integral_estimate(s, &index, eps, c, r, s_min)? };
                let bound = wgl_cube_bound(&tree, eps, &scales)?;
                wr.write_record([
                    c.x.to_string(),
                    c.y.to_string(),
                    c.t.to_string(),
                    r.to_string(),
                    eps.to_string(),
                    scales.len().to_string(),
                    est.to_string(),
                    bound.to_string(),
                ])?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

fn burgers(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec: CGSpec = match &cfg.scenario {
        Scenario::BurgersCg { spec } => spec.clone(),
        _ => match Scenario::by_name("burgers_cg")? {
            Scenario::BurgersCg { spec } => spec,
            _ => unreachable!(),
        },
    };
    let grid = cfg.grid().spec()?;
    let g = solve_cg(&spec, grid)?;
    io::write_grid_graph(create(out, "burgers.csv")?, &g)?;
    let residual = verify_along_characteristics(&g, &spec);
    // with c = 0 and g(t) = t the solution is t/(y+1)
    let linear =
        spec.c == 0.0 && spec.y_ref == 0.0 && spec.g.slopes().iter().all(|m| *m == 1.0) && spec.g.eval(0.0) == 0.0;
    let reference_error = linear.then(|| {
        (0..grid.len())
            .map(|k| {
                let (i, j) = grid.node(k);
                (g.phi[k] - library::t_over_y_plus_one(grid.y(i), grid.t(j))).abs()
            })
            .fold(0.0, f64::max)
    });
    write_json(
        out,
        "burgers.json",
        &json!({
            "spec": spec,
            "grid": grid,
            "residual": residual,
            "lipschitz": lipschitz_constant(&g.to_point_set()),
            "reference_error": reference_error,
        }),
    )
}

fn partition(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sample = materialize(cfg)?;
    let s = &sample.set;
    let index = PointIndex::new(&s.points);
    let tree = cube_tree(cfg, s, &index, true)?;
    let q0 = tree.levels[0][0];
    let n = match cfg.n {
        Some(n) => n,
        None => choose_n(&tree, s, &index, q0, cfg.b, cfg.epsilon)?,
    };
    let goodness = GoodnessConfig { b: cfg.b, epsilon: cfg.epsilon, n, w: VerticalSubgroup::yt() };
    let outcome = run_partition(&tree, s, &index, q0, &goodness)?;
    write_pieces_csv(create(out, "pieces.csv")?, s, &outcome.coding.pieces)?;
    write_json(out, "partition.json", &outcome.summary)
}

fn error_json(e: &Error) -> String {
    json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() }).to_string()
}

/// Entry point of the `heis-rect` binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim(), "exit_code": 2 }));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", error_json(&Error::Invariant("verify suites failed; see verify.json".into())));
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code())
        }
    }
}

/// Resolves the config and runs the subcommand inside a pool of `--threads`
/// workers.
pub fn execute(cli: &Cli) -> Result<bool> {
    let cfg = cli.common.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run(cli.command, &cfg, &cli.common.out))
}
