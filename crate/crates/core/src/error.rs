use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("group closure exceeded cap of {cap} elements; root system is likely not crystallographic/finite")]
    GroupNotFinite { cap: usize },

    #[error("internal consistency failure: {0}")]
    Inconsistency(String),

    #[error("unsupported kernel variant: {0}")]
    UnsupportedVariant(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error("evaluation failure at node {node:?}: {message}")]
    Evaluation { node: Vec<f64>, message: String },

    #[error("threshold too small: lambda {lambda} is at or below the root-box average {average}")]
    ThresholdTooSmall { lambda: f64, average: f64 },

    #[error("identity violation: {0}")]
    IdentityViolation(String),

    #[error("suite failure: {0}")]
    SuiteFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
