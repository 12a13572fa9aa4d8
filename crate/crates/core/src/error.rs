use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("density vanishes at interior node {index} (t = {t})")]
    DegenerateDensity { index: usize, t: f64 },

    #[error("density is not normalised: total mass {mass}")]
    Normalization { mass: f64 },

    #[error("space is disconnected: zero conductance on cell {cell}")]
    Disconnected { cell: usize },

    #[error("quotient undefined: function is constant")]
    ConstantFunction,

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ray {ray} is not a CD(N-1,N) input: {reason}")]
    NonCdRay { ray: usize, reason: String },

    #[error("empty ball around x = {x} with radius {r}")]
    EmptyBall { x: f64, r: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
