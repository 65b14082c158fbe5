use std::path::PathBuf;

/// Errors raised by the optimization pipeline.
///
/// The `Display` output is prefixed with the module that produced it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh: {0}")]
    Mesh(String),

    #[error("element: {0}")]
    Element(String),

    #[error("fea: {0}")]
    DimensionMismatch(String),

    #[error("fea: insufficient constraints, reduced stiffness matrix is not positive definite ({0})")]
    InsufficientConstraints(String),

    #[error("fea: linear solve residual {residual:.3e} above tolerance {tolerance:.1e}")]
    SolverTolerance { residual: f64, tolerance: f64 },

    #[error("filter: {0}")]
    Filter(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("optimizer: volume target {target:.6} unreachable, bisection bracket gives [{low:.6}, {high:.6}]")]
    BisectionBracket { target: f64, low: f64, high: f64 },

    #[error("optimizer: non-finite objective at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("problems: {0}")]
    Problem(String),

    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("export: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("export: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
