use thiserror::Error;

/// Every failure the library can report. `exit_code` maps each variant onto
/// the CLI contract.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("data integrity: Hecke relation fails at (m, n) = ({m}, {n}): {detail}")]
    HeckeViolation { m: u64, n: u64, detail: String },

    #[error("data integrity: {0}")]
    DataIntegrity(String),

    #[error("capacity: {what} needs {required:.4e}, cap is {cap:.4e}")]
    Capacity { what: String, required: f64, cap: f64 },

    #[error("coefficient index {n} is beyond the tabulated range {max}")]
    OutOfRange { n: u64, max: u64 },

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("log-gamma pole at a non-positive integer ({0})")]
    Pole(f64),

    #[error("numeric range: {0}")]
    NumericRange(String),

    #[error("evaluator failure at t = {t}: {msg}")]
    Evaluator { t: f64, msg: String },

    #[error("under-sampled: need at least {needed} usable records, have {got}")]
    UnderSampled { needed: usize, got: usize },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// Process exit code for this error (0 is success, never returned here).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse { .. } | LabError::HeckeViolation { .. } | LabError::DataIntegrity(_) => 2,
            LabError::Capacity { .. } | LabError::OutOfRange { .. } => 3,
            LabError::Evaluator { .. } | LabError::NumericRange(_) | LabError::Pole(_) => 4,
            LabError::UnderSampled { .. } => 4,
            LabError::Io(_) | LabError::Json(_) => 4,
            LabError::UnsupportedForm(_)
            | LabError::Domain(_)
            | LabError::Alignment(_)
            | LabError::Usage(_) => 64,
        }
    }

    pub fn capacity(what: impl Into<String>, required: f64, cap: f64) -> Self {
        LabError::Capacity { what: what.into(), required, cap }
    }
}
