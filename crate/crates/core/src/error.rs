use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model space: {0}")]
    InvalidSpace(String),

    #[error("point violates the model invariant: {0}")]
    InvalidPoint(String),

    /// Two points are too far apart for the connecting geodesic to be unique.
    #[error("distance {distance} is not below the uniqueness bound {bound}")]
    NotUnique { distance: f64, bound: f64 },

    #[error("cannot construct triangle: {0}")]
    InvalidTriangle(String),

    #[error("numerical domain violation: {0}")]
    NumericalDomain(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scene: {0}")]
    Scene(String),

    #[error("scene is disconnected: no path between the requested points")]
    Disconnected,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}
