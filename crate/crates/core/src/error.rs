use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("argument {index} is not homogeneous in superdegree ({detail})")]
    NonHomogeneous { index: usize, detail: String },

    #[error("operator {label}: word {word} maps to superdegree {found}, declared shift gives {expected}")]
    ShiftViolation {
        label: String,
        word: String,
        expected: i64,
        found: i64,
    },

    #[error("algebra {0} is not classical (needs supercommutative and associative flags)")]
    NotClassical(String),

    #[error("operator {label} must be odd, has superdegree {degree}")]
    NotOdd { label: String, degree: i64 },

    #[error("element must be {expected}, found superdegree {found}")]
    WrongParity { expected: &'static str, found: i64 },

    #[error("construction rejected: {0}")]
    Construction(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("internal consistency violation: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;
