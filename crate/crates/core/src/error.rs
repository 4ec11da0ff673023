use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing {role} column `{column}`")]
    MissingColumn { role: &'static str, column: String },

    #[error("missing response")]
    MissingResponse,

    #[error("column `{column}`, row {row}: {message}")]
    BadValue {
        column: String,
        row: usize,
        message: String,
    },

    #[error("column `{0}` already has role {1}")]
    DuplicateRole(String, &'static str),

    #[error("role {0} is already assigned")]
    RoleAlreadySet(&'static str),

    #[error("task needs at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Partition(String),

    #[error("deterministic method `{0}` cannot be repeated")]
    DeterministicMethod(String),

    #[error("plan/task mismatch: {0}")]
    PlanTaskMismatch(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("column {0} is constant")]
    ConstantColumn(String),

    #[error("k-means: k = {k} exceeds {distinct} distinct points")]
    TooManyClusters { k: usize, distinct: usize },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("learner: {0}")]
    Learner(String),

    #[error("measure: {0}")]
    Measure(String),

    #[error("training rows leak test index {index} in fold {fold}")]
    Leakage { fold: usize, index: usize },

    #[error("covariance matrix not factorizable")]
    NotFactorizable,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("geojson: {0}")]
    GeoJson(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
