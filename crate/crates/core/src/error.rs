use crate::geometry::Vec3;

/// Errors produced by the localization library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("receiver location coincides with LED at [{0}, {1}, {2}]")]
    CoincidentWithLed(f64, f64, f64),

    #[error("vector is not unit length (norm = {0})")]
    NotUnitLength(f64),

    #[error("zero-length vector where a direction is required")]
    ZeroVector,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no VAP produced a positive observation; cannot select anchors")]
    NoAnchors,

    #[error("at least 2 anchor lines are required for a 3D solve, got {0}")]
    InsufficientAnchors(usize),

    #[error("no RSS contour exists at height z = {0}")]
    NoContour(f64),

    #[error("singular evaluation point (x^2 + m = 0)")]
    Singularity,

    #[error("observation length {got} does not match scene LED count {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no initial points: provide an AOA seed or at least one RRC cluster")]
    NoInitialPoints,
}

impl Error {
    pub(crate) fn coincident(p: Vec3) -> Self {
        Error::CoincidentWithLed(p.x, p.y, p.z)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
