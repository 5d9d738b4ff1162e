use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("segment {index} ends at {end} but segment {next} starts at {start}")]
    Overlap {
        index: usize,
        next: usize,
        end: f64,
        start: f64,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("depth {depth} needs {atoms} atoms, budget is {budget}")]
    Depth {
        depth: usize,
        atoms: u128,
        budget: usize,
    },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("eigenvalue index {n} out of range for a problem with {len} eigenvalues")]
    Index { n: usize, len: usize },

    #[error("tolerance {tol:e} is below the floor {min:e}")]
    Tolerance { tol: f64, min: f64 },

    #[error("structure error: {0}")]
    Structure(String),

    #[error("lambda {lambda:e} exceeds the trusted limit {limit:e} of this discretization")]
    Resolution { lambda: f64, limit: f64 },

    #[error("events at lambda ~ {lambda:e} cannot be ordered: {detail}")]
    EventCollision { lambda: f64, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature reached error {achieved:e}, target {target:e}, after {evals} evaluations")]
    Quadrature {
        achieved: f64,
        target: f64,
        evals: usize,
    },

    #[error("function is not monotone on [{lo:e}, {hi:e}]: values {f_lo:e}, {f_hi:e}")]
    NonMonotone {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Overlap { .. } => "overlap",
            Error::Range(_) => "range",
            Error::Weight(_) => "weight",
            Error::Depth { .. } => "depth",
            Error::Degenerate(_) => "degenerate",
            Error::Index { .. } => "index",
            Error::Tolerance { .. } => "tolerance",
            Error::Structure(_) => "structure",
            Error::Resolution { .. } => "resolution",
            Error::EventCollision { .. } => "event_collision",
            Error::Precondition(_) => "precondition",
            Error::Domain(_) => "domain",
            Error::Quadrature { .. } => "quadrature",
            Error::NonMonotone { .. } => "non_monotone",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
