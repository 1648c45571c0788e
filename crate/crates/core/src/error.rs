use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the search domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bound has no anchors")]
    EmptyBound,

    #[error(
        "inconsistent interval state: |{z_hi} - {z_lo}| exceeds L * ({x_hi} - {x_lo}) with L = {lipschitz}"
    )]
    InconsistentInterval {
        x_lo: f64,
        x_hi: f64,
        z_lo: f64,
        z_hi: f64,
        lipschitz: f64,
    },

    #[error("unknown problem id {0}")]
    UnknownProblem(u32),

    #[error("safety threshold {threshold} violated at x = {x}: observed {value}")]
    SafetyViolation { x: f64, value: f64, threshold: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Config(err.to_string())
    }
}
