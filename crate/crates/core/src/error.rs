use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at (x={x}, k={k})")]
    NonFinite { x: f64, k: f64, value: f64 },

    #[error("unsupported derivative order {order} (supported: 1, 2)")]
    UnsupportedOrder { order: u32 },

    #[error("axis too short for a 4th-order stencil: {points} points, need {needed}")]
    AxisTooShort { points: usize, needed: usize },

    #[error("integration window [{x0}, {x1}] x [{k0}, {k1}] lies outside the grid")]
    WindowOutsideGrid { x0: f64, x1: f64, k0: f64, k1: f64 },

    #[error("polyline is not closed: {0}")]
    OpenPolyline(String),

    #[error("point (x={x}, k={k}) lies outside the grid")]
    PointOutsideGrid { x: f64, k: f64 },

    #[error("{what} argument {value} outside supported range {range}")]
    OutOfRange { what: &'static str, value: f64, range: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Wigner function supports derivatives up to order {available}, series needs {needed}")]
    InsufficientOrder { needed: u32, available: u32 },

    #[error("velocity undefined near Wigner zero at (x={x}, k={k})")]
    VelocityUndefined { x: f64, k: f64 },

    #[error("correction regime exceeded at beta={beta}: corrected partition function {z} is not positive")]
    CorrectionRegimeExceeded { beta: f64, z: f64 },

    #[error("no Hermite reduction for model '{0}'")]
    NoHermiteReduction(String),

    #[error("operation requires the {expected} model, got '{got}'")]
    ModelMismatch { expected: &'static str, got: String },

    #[error("non-positive partition function {z} at beta={beta}")]
    NonPositivePartition { beta: f64, z: f64 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
