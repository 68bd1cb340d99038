use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed algebra: {0}")]
    Malformed(String),

    #[error("graded algebra is not fundamental: {0}")]
    NotFundamental(String),

    #[error("invalid reduction at degree {degree}: {reason}")]
    Reduction { degree: i32, reason: String },

    #[error("degree {0} lies outside the computed range")]
    DegreeOutOfRange(i32),

    #[error("point is not regular: {0}")]
    IrregularPoint(String),

    #[error("frame is not Cramer-solvable: {0}")]
    NotCramerSolvable(String),

    #[error("not a symmetry: {0}")]
    NotSymmetry(String),

    #[error("{0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
