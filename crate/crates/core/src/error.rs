use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("slot {slot} out of range for rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },

    #[error("slot {slot} has variance {found}, operation requires {required}")]
    VarianceMismatch {
        slot: usize,
        found: &'static str,
        required: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "metric is numerically singular at {point:?} (condition estimate {condition:.3e})"
    )]
    SingularMetric { point: Vec<f64>, condition: f64 },

    #[error("metric is not positive definite at {point:?} (pivot {pivot:.3e})")]
    IndefiniteMetric { point: Vec<f64>, pivot: f64 },

    #[error("field evaluation produced a non-finite value at {point:?}")]
    NonFiniteField { point: Vec<f64> },

    #[error("plane is degenerate: |phi X| = {norm:.3e} after projecting out xi")]
    DegeneratePlane { norm: f64 },

    #[error("embedding has rank-deficient differential at {point:?} (got rank {rank}, need {need})")]
    ImmersionFailure {
        point: Vec<f64>,
        rank: usize,
        need: usize,
    },

    #[error("vector is not normal to the submanifold (tangential norm {tangential:.3e})")]
    NotNormal { tangential: f64 },

    #[error("unknown model space '{name}'; available: {available}")]
    UnknownSpace { name: String, available: String },

    #[error("unknown embedding '{name}'; available: {available}")]
    UnknownEmbedding { name: String, available: String },

    #[error("unknown theorem id '{name}'; available: {available}")]
    UnknownTheorem { name: String, available: String },

    #[error("unknown parallelism kind '{name}'; available: {available}")]
    UnknownKind { name: String, available: String },

    #[error("precondition failed: {what} (residual {residual:.3e})")]
    PreconditionFailed { what: String, residual: f64 },

    #[error("{0}")]
    Unsupported(String),
}
