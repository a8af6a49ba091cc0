use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("radial integration overflowed at r = {r} (lambda = {lambda})")]
    Overflow { r: f64, lambda: f64 },

    #[error("no eigenvalue bracket found below lambda_max = {lambda_max}")]
    SearchExhausted { lambda_max: f64 },

    #[error("invalid sweep interval: {0}")]
    Domain(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("convexity error: {0}")]
    Convexity(String),

    #[error("meshing error: {0}")]
    Meshing(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("factorization failed at pivot {pivot} (value {value:e})")]
    Singular { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("flow degenerated at t = {t}: {reason}")]
    FlowDegenerate { t: f64, reason: String, last: Box<crate::flow::SweepRecord> },

    #[error("remeshing failed at t = {t}: {reason}")]
    Remesh { t: f64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("class membership failed: {0}")]
    Membership(String),

    #[error("section mismatch: {0}")]
    SectionMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
