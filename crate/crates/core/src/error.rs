use thiserror::Error;

/// Errors produced while discretizing or solving a curvature problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate cloud: {0}")]
    DegenerateCloud(String),

    #[error("incomplete stencil at point {point} (direction {direction}): quadrant {quadrant} has no neighbour within radius {radius:.3e}")]
    IncompleteStencil {
        point: usize,
        direction: usize,
        quadrant: usize,
        radius: f64,
    },

    #[error("degenerate stencil at point {point} (direction {direction}): {reason}")]
    DegenerateStencil {
        point: usize,
        direction: usize,
        reason: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("divergence at iteration {iteration}: non-finite value at point {point}")]
    Divergence { iteration: usize, point: usize },

    #[error("stalled step at iteration {iteration}: dt = {dt:.3e} below floor {floor:.3e}")]
    StalledStep { iteration: usize, dt: f64, floor: f64 },

    #[error("max iterations exceeded ({iterations}), residual {residual:.3e}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("not a strict pair: residual ordering fails at point {point}")]
    NotStrictPair { point: usize },

    #[error("compatibility condition fails: integral of curvature {lhs:.6} is not below {rhs:.6}")]
    Incompatible { lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
