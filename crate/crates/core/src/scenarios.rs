//! Experiment configuration and the synthetic inputs it names.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::burgers::{library, solve_cg, CGSpec};
use crate::cubes::{build_cubes, compute_betas, default_j_max, default_j_min, finest_j_min, CubeTree};
use crate::error::{Error, Result};
use crate::graphs::{GraphPointSet, GridGraph, GridSpec};
use crate::heis::HPoint;
use crate::index::PointIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    Affine {
        c: f64,
        d: f64,
    },
    BurgersCg {
        spec: CGSpec,
    },
    ExampleTys,
    /// `φ = slope·y + amplitude·sin(frequency·y)`.
    Perturbed {
        slope: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Two graphs `φ = ±slope·y` over `W_{y,t}`, crossing along `y = 0`.
    TwoPatchUnion {
        slope: f64,
    },
    CustomFile {
        path: PathBuf,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Affine { .. } => "affine",
            Scenario::BurgersCg { .. } => "burgers_cg",
            Scenario::ExampleTys => "example_tys",
            Scenario::Perturbed { .. } => "perturbed",
            Scenario::TwoPatchUnion { .. } => "two_patch_union",
            Scenario::CustomFile { .. } => "custom_file",
        }
    }

    /// The two-patch union uses a wide, coarse strip so that most cubes see
    /// a single sheet; the others sample `[-1, 1]²`.
    pub fn default_grid(&self) -> GridConfig {
        match self {
            Scenario::TwoPatchUnion { .. } => GridConfig { y: [-3.9375, 3.9375], t: [-1.0, 1.0], ny: 64, nt: 129 },
            _ => GridConfig::default(),
        }
    }

    /// Named scenario with its default parameters.
    pub fn by_name(name: &str) -> Result<Scenario> {
        Ok(match name {
            "affine" => Scenario::Affine { c: 0.5, d: 0.0 },
            "burgers_cg" => Scenario::BurgersCg {
                spec: CGSpec::new(
                    0.0,
                    crate::burgers::PiecewiseLinear::linear(1.0, 0.0),
                    crate::burgers::Domain { y: [-0.99, 1.0], t: [-1.0, 1.0] },
                )?,
            },
            "example_tys" => Scenario::ExampleTys,
            "perturbed" => Scenario::Perturbed { slope: 0.5, amplitude: 0.05, frequency: 4.0 },
            "two_patch_union" => Scenario::TwoPatchUnion { slope: 0.5 },
            "custom_file" => return Err(Error::Config("custom_file needs a path in the config file".into())),
            other => return Err(Error::Config(format!("unknown scenario {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub y: [f64; 2],
    pub t: [f64; 2],
    pub ny: usize,
    pub nt: usize,
}

impl Default for GridConfig {
    /// Spacing `1/16` in `y` and `1/256` in `t`, which is uniform for the
    /// metric; 32 rows so that `y = 0` is not a node.
    fn default() -> Self {
        GridConfig { y: [-0.96875, 0.96875], t: [-1.0, 1.0], ny: 32, nt: 513 }
    }
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::spanning(self.y[0], self.y[1], self.t[0], self.t[1], self.ny, self.nt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scenario: Scenario,
    /// Parameter grid; the scenario's default when absent.
    pub grid: Option<GridConfig>,
    pub radii: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// `(j_min, j_max)`; derived from the samples when absent.
    pub scales: Option<(i32, i32)>,
    pub lipschitz_bound: f64,
    pub knots: usize,
    pub starts: usize,
    pub max_iter: usize,
    pub delta_scale: f64,
    /// Projection-mass fraction `b` of the partition pipeline.
    pub b: f64,
    /// β threshold of the partition pipeline.
    pub epsilon: f64,
    /// Bad-ball cutoff; chosen from the data when absent.
    pub n: Option<usize>,
    pub ball_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            scenario: Scenario::Affine { c: 0.5, d: 0.0 },
            grid: None,
            radii: vec![0.125, 0.25, 0.5],
            epsilons: vec![0.01, 0.05, 0.1, 0.2],
            scales: None,
            lipschitz_bound: 4.0,
            knots: 5,
            starts: 8,
            max_iter: 500,
            delta_scale: 0.125,
            b: 0.5,
            epsilon: 0.05,
            n: None,
            ball_samples: 16,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> GridConfig {
        self.grid.unwrap_or_else(|| self.scenario.default_grid())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid().spec()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return bad("radii must be positive");
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("epsilons must be positive");
        }
        if let Some((a, b)) = self.scales {
            if a > b {
                return bad("scales must satisfy jmin <= jmax");
            }
        }
        if !(self.lipschitz_bound > 0.0) || self.knots < 1 || self.starts < 1 {
            return bad("need lipschitz_bound > 0, knots >= 1, starts >= 1");
        }
        if !(self.delta_scale > 0.0 && self.delta_scale < 1.0) {
            return bad("delta_scale must lie in (0, 1)");
        }
        if !(self.b > 0.0) || !(self.epsilon > 0.0) || self.n == Some(0) {
            return bad("need b > 0, epsilon > 0, N >= 1");
        }
        match &self.scenario {
            Scenario::ExampleTys if self.grid().y[0] <= -1.0 => bad("example_tys needs y > -1"),
            Scenario::TwoPatchUnion { .. } => {
                let g = self.grid().spec()?;
                if (0..g.ny).any(|i| g.y(i).abs() < 1e-12) {
                    return bad("two_patch_union needs a grid that skips y = 0");
                }
                Ok(())
            }
            Scenario::BurgersCg { spec } => spec.validate(),
            _ => Ok(()),
        }
    }
}

/// Samples of a scenario; `graph` is present for single-graph scenarios.
#[derive(Debug, Clone)]
pub struct Sample {
    pub graph: Option<GridGraph>,
    pub set: GraphPointSet,
}

pub fn materialize(cfg: &ExperimentConfig) -> Result<Sample> {
    cfg.validate()?;
    let grid = cfg.grid().spec()?;
    let single = |g: GridGraph, name: &str| {
        let mut set = g.to_point_set();
        set.provenance = name.to_string();
        Sample { graph: Some(g), set }
    };
    Ok(match &cfg.scenario {
        Scenario::Affine { c, d } => single(GridGraph::from_fn(grid, |y, _| c * y + d)?, "affine"),
        Scenario::BurgersCg { spec } => single(solve_cg(spec, grid)?, "burgers_cg"),
        Scenario::ExampleTys => single(GridGraph::from_fn(grid, library::t_over_y_plus_one)?, "example_tys"),
        Scenario::Perturbed { slope, amplitude, frequency } => {
            single(GridGraph::from_fn(grid, |y, _| slope * y + amplitude * (frequency * y).sin())?, "perturbed")
        }
        Scenario::TwoPatchUnion { slope } => {
            let a = GridGraph::from_fn(grid, |y, _| slope * y)?.to_point_set();
            let b = GridGraph::from_fn(grid, |y, _| -slope * y)?.to_point_set();
            let mut set = a.concat(&b);
            set.provenance = "two_patch_union".into();
            Sample { graph: None, set }
        }
        Scenario::CustomFile { path } => {
            let (graph, set) = crate::io::read_any(path)?;
            Sample { graph, set }
        }
    })
}

/// `count` sample points drawn without replacement under `cfg.seed`.
pub fn ball_centers(cfg: &ExperimentConfig, set: &GraphPointSet, count: usize) -> Vec<HPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = count.min(set.len());
    rand::seq::index::sample(&mut rng, set.len(), k).into_iter().map(|i| set.points[i]).collect()
}

/// Cube levels from `cfg.scales`, else derived from the samples; `finest`
/// pushes `j_min` down until distinct samples sit in distinct leaves.
pub fn cube_levels(cfg: &ExperimentConfig, set: &GraphPointSet, finest: bool) -> (i32, i32) {
    if let Some(s) = cfg.scales {
        return s;
    }
    let j_max = default_j_max(&set.points);
    let j_min = if finest { finest_j_min(&set.points) } else { default_j_min(&set.points) };
    (j_min.unwrap_or(j_max).min(j_max), j_max)
}

/// Cube tree over `set` with cached β values.
pub fn cube_tree(cfg: &ExperimentConfig, set: &GraphPointSet, index: &PointIndex, finest: bool) -> Result<CubeTree> {
    let (j_min, j_max) = cube_levels(cfg, set, finest);
    let mut tree = build_cubes(set, j_min, j_max)?;
    compute_betas(&mut tree, set, index);
    Ok(tree)
}
