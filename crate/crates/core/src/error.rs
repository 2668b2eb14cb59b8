use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// The domain is too small to hold a single lattice point for this spacing.
    #[error("empty lattice: no point at distance >= {eps} from the boundary of the domain")]
    EmptyLattice { eps: f64 },

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: [f64; 3] },

    /// The grid is too coarse to resolve the scaffold struts.
    #[error("grid spacing {h} does not resolve the scaffold (need h <= {required})")]
    UnresolvedGrid { h: f64, required: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    /// A minimization produced a non-finite energy.
    #[error("minimization diverged at iteration {iteration}: energy {energy}, step {step}")]
    Diverged {
        iteration: usize,
        energy: f64,
        step: f64,
    },

    #[error("unknown study tag `{0}`")]
    UnknownStudy(String),

    #[error("study `{0}` failed its pass criteria")]
    StudyFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
