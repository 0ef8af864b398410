use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("window [{lo}, {hi}] exceeds the truncated domain [{x_min}, {x_max}]")]
    WindowExceedsDomain { lo: f64, hi: f64, x_min: f64, x_max: f64 },

    #[error("initial datum is not confined to the inner 80% of the domain (|u| = {value:e} at x = {x})")]
    SupportViolation { x: f64, value: f64 },

    #[error("initial datum has mean {mean:e}, above the admissible {limit:e}")]
    NonZeroMean { mean: f64, limit: f64 },

    #[error("anchor x = {0} is not a cell edge")]
    AnchorOffEdge(f64),

    #[error("elliptic regularization needs epsilon > 0 (got {0}); use the exact primitive for epsilon = 0")]
    NonPositiveViscosity(f64),

    #[error("{0}")]
    InvalidSetup(String),

    #[error("singular tridiagonal system at row {0}")]
    SingularSystem(usize),

    #[error("non-finite value produced at step {step} (t = {time}); CFL violation or blow-up")]
    NonFinite { step: usize, time: f64 },

    #[error("entropy residual needs snapshots at every step (snapshot_every = {0})")]
    CadenceMismatch(usize),

    #[error("boundary trace check needs a half-line trajectory")]
    NoBoundary,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("nothing to plot")]
    EmptyPlot,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
