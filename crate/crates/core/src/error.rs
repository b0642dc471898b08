use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("entry ({i},{j}) is negative")]
    NegativeDistance { i: usize, j: usize },
    #[error("matrix is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("diagonal entry ({i},{i}) is nonzero")]
    NonzeroDiagonal { i: usize },
    #[error("distinct points {i} and {j} are at distance 0")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality violated on ({i},{k}) via {j}")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("point index {index} out of range for a space of {n} points")]
    PointOutOfRange { index: usize, n: usize },
    #[error("normalization is undefined for a single point")]
    SinglePoint,
    #[error("space has diameter {diameter}, expected at most 2")]
    NotNormalized { diameter: f64 },
    #[error("invalid ultrametric tree: {0}")]
    InvalidTree(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("beta = {beta} does not solve the exponent equation for D = {distortion} (residual {residual:e})")]
    ParameterMismatch { beta: f64, distortion: f64, residual: f64 },
    #[error("invalid radii schedule: {0}")]
    InvalidSchedule(String),
    #[error("schedule does not decay below the smallest distance within {limit} levels")]
    NonTerminating { limit: usize },
    #[error("sampling did not assign every active point within {cap} samples")]
    SampleCap { cap: u64 },
    #[error("exhaustive search supports at most {max} points, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("random graph still disconnected after {attempts} attempts")]
    Disconnected { attempts: usize },
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
