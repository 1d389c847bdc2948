use thiserror::Error;

/// Errors produced by the polymatrix library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("profile space too large: product of strategy counts is {product}, cap is {cap}")]
    Capacity { product: u128, cap: u128 },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("noise model undefined: {0}")]
    ModelUndefined(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate price of anarchy: max welfare {numerator}, min equilibrium welfare {denominator}")]
    DegeneratePoa { numerator: f64, denominator: f64 },

    #[error("sample schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("parse error at row {row}, column {column}: {message}")]
    Cell {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Capacity { .. } => "capacity",
            Error::DimensionCap { .. } => "capacity",
            Error::ModelUndefined(_) => "model-undefined",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::DegeneratePoa { .. } => "degenerate-poa",
            Error::ScheduleInfeasible(_) => "schedule-infeasible",
            Error::Parse { .. } | Error::Cell { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
