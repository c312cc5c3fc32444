use std::path::PathBuf;

use crate::spectral::Representation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expected a field in {expected} representation, found {found}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "advective stability bound violated: dt = {dt:e} exceeds {dt_max:e} (advective CFL {cfl:.4})"
    )]
    Stability { dt: f64, dt_max: f64, cfl: f64 },

    #[error("initial data rejected: {reason} (acoustic energy {acoustic:e}, kinetic+magnetic energy {bulk:e})")]
    InitialData {
        reason: String,
        acoustic: f64,
        bulk: f64,
    },

    #[error("test field rejected: {0}")]
    TestField(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("checkpoint {path}: {kind}")]
    Checkpoint { path: PathBuf, kind: CheckpointError },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("magic mismatch (found {found:?})")]
    Magic { found: [u8; 8] },
    #[error("truncated or oversized file: expected {expected} bytes, found {found}")]
    Size { expected: u64, found: u64 },
    #[error("grid size {found} does not match expected {expected}")]
    GridSize { expected: usize, found: usize },
    #[error("invalid header: {0}")]
    Header(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for failures of the time integrator itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Stability { .. })
    }
}
