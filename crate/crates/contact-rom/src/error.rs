use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate snapshot matrix")]
    DegenerateSnapshotMatrix,

    #[error("redundant active constraints")]
    RedundantActiveConstraints,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Cholesky factorization hit a non-positive pivot; the operator is not
    /// positive definite (usually missing Dirichlet data).
    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("inverted element {element}")]
    InvertedElement { element: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("zero dictionary")]
    ZeroDictionary,

    /// The convex-hull solver refuses problems whose feasible set failed the
    /// cross-penetration convexity test.
    #[error("non-convex feasible region (max cross penetration {max_crpen:.3e} exceeds {threshold:.3e})")]
    NonConvexFeasibleRegion { max_crpen: f64, threshold: f64 },

    #[error("parameter {value} outside parameter space [{lo}, {hi}]")]
    ParameterOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
