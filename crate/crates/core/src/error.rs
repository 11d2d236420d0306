use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("point is off the vertical subgroup (normal offset {0:e})")]
    NotInSubgroup(f64),

    #[error("grid index ({i}, {j}) out of range for {ny}x{nt} grid")]
    IndexOutOfRange { i: usize, j: usize, ny: usize, nt: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("characteristics cross at s = {s} (feet t1 = {t1}, t2 = {t2})")]
    CrossingDetected { s: f64, t1: f64, t2: f64 },

    #[error("sampled intrinsic gradient spread {spread} exceeds {tol}")]
    NotConstantGradient { spread: f64, tol: f64 },

    #[error("ball meets no samples")]
    Undefined,

    #[error("{uncovered} of {total} required nodes fall outside the available domain")]
    Coverage { uncovered: usize, total: usize },

    #[error("Lipschitz estimate {estimate} exceeds bound {bound}")]
    LipschitzExceeded { estimate: f64, bound: f64 },

    #[error("no beta value cached for cube {0}")]
    MissingBeta(usize),

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("no admissible sub-ball")]
    NoAdmissibleBall,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPositiveScale(_) => "non_positive_scale",
            Error::NotInSubgroup(_) => "not_in_subgroup",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::CrossingDetected { .. } => "crossing_detected",
            Error::NotConstantGradient { .. } => "not_cg",
            Error::Undefined => "undefined",
            Error::Coverage { .. } => "coverage",
            Error::LipschitzExceeded { .. } => "lipschitz_exceeded",
            Error::MissingBeta(_) => "missing_beta",
            Error::Hypothesis(_) => "hypothesis",
            Error::NoAdmissibleBall => "no_admissible_ball",
            Error::Empty(_) => "empty",
            Error::Config(_) => "config",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Process exit status: 2 for bad input, 3 for numerical failures, 4 for
    /// invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_)
            | Error::InvalidGrid(_)
            | Error::NonPositiveScale(_)
            | Error::NotInSubgroup(_)
            | Error::IndexOutOfRange { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
