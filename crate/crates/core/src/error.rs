use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("gram matrix not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("ellipse solver did not converge after {iterations} iterations (kappa_max={kappa_max:e}, kappa_min={kappa_min:e})")]
    EllipseNoConvergence {
        iterations: usize,
        kappa_max: f64,
        kappa_min: f64,
    },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate domain triangle {0}")]
    DegenerateTriangle(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("objective is NaN at iteration {iteration}: {dump}")]
    NanObjective { iteration: usize, dump: String },

    #[error("length graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
