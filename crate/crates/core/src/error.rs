use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix dimension {0} exceeds the dense limit of {max}", max = crate::linalg::DENSE_DIM_LIMIT)]
    DimensionTooLarge(usize),

    #[error("index outside box: {0}")]
    IndexOutsideBox(String),

    #[error("weight rule does not cover the requested box: {0}")]
    RuleDomainTooSmall(String),

    #[error("weights are not unitary: {0}")]
    NonUnitaryWeights(String),

    #[error("intertwiner recursion is path dependent (defect {defect:.3e} at {at})")]
    PathDependence { defect: f64, at: String },

    #[error("weight family is not diagonal (rule kind `{0}`)")]
    NotDiagonalRule(String),

    #[error("operators do not commute (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NotCommuting { residual: f64, tolerance: f64 },

    #[error("weight family rejected: {0}")]
    WeightsRejected(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {what} `{name}`")]
    UnknownStrategy { what: &'static str, name: String },

    #[error("malformed input at {path}: {message}")]
    Malformed { path: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn malformed(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            message: message.into(),
        }
    }
}
