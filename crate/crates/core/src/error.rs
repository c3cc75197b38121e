use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("zero pivot in LDL factorization at row {row} (shift {shift})")]
    ZeroPivot { row: usize, shift: f64 },

    #[error(
        "eigensolver did not converge: found {found} of {expected} eigenvalues in ]{lo}, {hi}["
    )]
    NoConvergence {
        found: usize,
        expected: usize,
        lo: f64,
        hi: f64,
    },

    #[error("branch tracking failed at flux index {phi_index} (energy {energy}, best overlap {overlap:.3}); use a finer flux grid")]
    TrackingFailure {
        phi_index: usize,
        energy: f64,
        overlap: f64,
    },

    #[error("no point of the lowest edge branch falls in ]{lo}, {hi}[; widen the k grid or move the window")]
    NoBranchInWindow { lo: f64, hi: f64 },

    #[error(
        "Fermi energy {fermi} is within {distance:e} of level {level}; move it off the spectrum"
    )]
    FermiCollision {
        fermi: f64,
        level: f64,
        distance: f64,
    },

    #[error(
        "only {found} levels in the window, need at least {needed}; increase the circumference L"
    )]
    TooFewLevels { found: usize, needed: usize },

    #[error("trace {trace} is not an integer within {tol:e}; projections are invalid")]
    NonIntegerTrace { trace: f64, tol: f64 },

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("empty window ]{lo}, {hi}[")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
