use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unsupported dimension {0}; only d = 2 and d = 3 are implemented")]
    UnsupportedDimension(usize),

    #[error("phase grids or time steps differ between slabs")]
    GeometryMismatch,

    #[error("initial data norm {norm:.6e} exceeds the vacuum radius R_max = {r_max:.6e}")]
    Admissibility { norm: f64, r_max: f64 },

    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("beginning condition violated on the grid by {violation:.3e}")]
    BeginningCondition { violation: f64 },

    #[error("mollified-delta oracle not converged: {coarse:.8} at eps, {fine:.8} at eps/2")]
    OracleNonConvergence { coarse: f64, fine: f64 },

    #[error("{check} violated: {value:.6e} exceeds {limit:.6e}")]
    BoundViolation { check: String, value: f64, limit: f64 },

    #[error("contraction probe is degenerate: the two slabs coincide")]
    DegenerateProbe,

    #[error("configuration is invalid:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("failed to parse configuration {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
