use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SltError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("degenerate ray: {0}")]
    DegenerateRay(String),

    #[error("angle {angle} outside [0, {max}]")]
    AngleOutOfRange { angle: f64, max: f64 },

    #[error("arc length {arc} outside [0, {total}]")]
    ArcOutOfRange { arc: f64, total: f64 },

    #[error("duplicate points at indices {0:?}")]
    DuplicatePoints(Vec<(usize, usize)>),

    #[error("eps = {0} outside the admissible range")]
    EpsOutOfRange(f64),

    #[error("surface {0} carries no cones")]
    EmptySurface(usize),

    #[error("apex angle {angle} at level {level} reaches pi/2")]
    AngleOverflow { level: usize, angle: f64 },

    #[error("dimension {0} too small for this construction")]
    DimensionTooSmall(usize),

    #[error("vertex {0} unreachable from the root")]
    Unreachable(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T, E = SltError> = std::result::Result<T, E>;
