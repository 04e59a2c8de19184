use thiserror::Error;

/// Errors raised by model building, fitting and testing.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}` has a missing or non-numeric value at row {row}")]
    MissingValue { column: String, row: usize },
    #[error("reference level `{level}` does not occur in factor `{factor}`")]
    UnknownReference { factor: String, level: String },
    #[error("factor `{factor}` has level `{level}` that is not in its declared level order")]
    UndeclaredLevel { factor: String, level: String },
    #[error("response `{0}` must be binary (0/1)")]
    NonBinaryResponse(String),
    #[error("design matrix is rank deficient; aliased columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("not enough observations: {n} rows for {p} coefficients")]
    TooFewObservations { n: usize, p: usize },
    #[error("term `{0}` is not in the model")]
    UnknownTerm(String),
    #[error("covariance block for `{0}` is singular")]
    SingularBlock(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("input `{0}` is constant")]
    ConstantInput(&'static str),
    #[error("need at least two levels, got {0}")]
    TooFewLevels(usize),
    #[error("operation requires a logit-link model")]
    NotLogit,
    #[error("table parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StatsError>;
