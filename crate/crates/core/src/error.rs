use thiserror::Error;

/// Errors produced by the solver, the analysis routines and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid monotone graph: {0}")]
    Graph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("coordinate descent did not converge after {iters} sweeps (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("explicit sub-stepping needs {required} sub-steps, ceiling is {ceiling}")]
    SubstepCeiling { required: usize, ceiling: usize },

    #[error("step failed at t = {t}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("profile is not convex: second difference {min_second_difference:e} at node {node}")]
    NotConvex { node: usize, min_second_difference: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("archive error: {0}")]
    Archive(String),

    #[error("truncated archive {path}: data ends at byte offset {offset}")]
    Truncated { path: String, offset: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
