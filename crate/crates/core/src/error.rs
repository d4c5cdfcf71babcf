use thiserror::Error;

/// Errors raised across estimation, inference and I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("model is not causal (spectral radius {spectral_radius:.6})")]
    NotCausal { spectral_radius: f64 },

    #[error("insufficient data for season {season}: {available} usable cycles, {required} required")]
    InsufficientData {
        season: usize,
        available: usize,
        required: usize,
    },

    #[error("singular design for season {season} (condition number {condition:e})")]
    SingularDesign { season: usize, condition: f64 },

    #[error("constraint matrix for season {season} is rank deficient")]
    RankDeficientConstraint { season: usize },

    #[error("lag {lag} out of range for {n} observations")]
    LagOutOfRange { lag: i64, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("I - sum of lag coefficients is nearly singular (condition number {condition:e})")]
    NearSingularUnit { condition: f64 },

    #[error("closed-form moments require m >= 1")]
    UnsupportedM,

    #[error("restriction covariance is singular (condition number {condition:e})")]
    SingularRestriction { condition: f64 },

    #[error("covariance diagonal {index} is negative ({value:e})")]
    NegativeVariance { index: usize, value: f64 },

    #[error("cannot parse restriction `{input}`: {reason}")]
    RestrictionParse { input: String, reason: String },

    #[error("parse error at row {row}, column {column}: {reason}")]
    Parse {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("input contains no observations")]
    EmptyInput,

    #[error("{0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    /// Short variant name, used to tally failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "InvalidModel",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotCausal { .. } => "NotCausal",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::SingularDesign { .. } => "SingularDesign",
            Error::RankDeficientConstraint { .. } => "RankDeficientConstraint",
            Error::LagOutOfRange { .. } => "LagOutOfRange",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NearSingularUnit { .. } => "NearSingularUnit",
            Error::UnsupportedM => "UnsupportedM",
            Error::SingularRestriction { .. } => "SingularRestriction",
            Error::NegativeVariance { .. } => "NegativeVariance",
            Error::RestrictionParse { .. } => "RestrictionParse",
            Error::Parse { .. } => "Parse",
            Error::EmptyInput => "EmptyInput",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::RestrictionParse { .. } => 2,
            Error::Parse { .. } | Error::EmptyInput | Error::Io(_) | Error::InvalidModel(_) => 3,
            Error::InsufficientData { .. } => 3,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
