use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("gamma must lie in (0, 1), got {0}")]
    GammaOutOfRange(f64),
    #[error("value {value} at node {index} is outside the domain: {reason}")]
    Domain {
        index: usize,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("grid size mismatch: {left} vs {right} nodes")]
    GridMismatch { left: usize, right: usize },
    #[error("eigenvalue index {k} out of range 1..={max}")]
    IndexOutOfRange { k: usize, max: usize },
    #[error("potential is identically zero")]
    ZeroPotential,
    #[error("f_alpha has an empty positivity region: alpha = {alpha} <= alpha_min = {alpha_min}")]
    EmptyPositivityRegion { alpha: f64, alpha_min: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("trajectory left the positive half-line at x = {x} (y = {y})")]
    Collapse { x: f64, y: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
