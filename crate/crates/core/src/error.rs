use thiserror::Error;

use crate::num::linalg::LinalgError;

/// Errors raised by the laboratory modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid function spec: {0}")]
    InvalidSpec(String),
    #[error("point {0} lies inside the unit disk; use the continuation evaluator")]
    Domain(String),
    #[error("point {0} is within {1:e} of the cut")]
    CutCollision(String, f64),
    #[error("fourier coefficients disagree across radii (max deviation {0:e}); undeclared singularity?")]
    NonConvergence(f64),
    #[error("section size {0} needs {1} coefficients, window holds {2}")]
    InsufficientWindow(usize, usize, usize),
    #[error("expected {expected} poles in the disk, found {found} (annulus holds {annulus})")]
    PoleCountMismatch { expected: usize, found: usize, annulus: usize },
    #[error("singular value s_{0} is below the noise floor")]
    NoiseFloor(usize),
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("negative equilibrium weight {0:e}")]
    NegativeWeight(f64),
    #[error("degenerate chain: {0}")]
    DegenerateChain(String),
    #[error("points coincide")]
    Coincident,
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error("no admissible level: {0}")]
    LevelSelection(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
