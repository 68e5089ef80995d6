use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant to a stable exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution spec: {0}")]
    Parse(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The upper tail 1 - F(x) fell below the representable floor.
    #[error("tail probability underflow at x = {x}: 1 - F(x) = {ccdf:e} is below 1e-300")]
    TailUnderflow { x: f64, ccdf: f64 },

    #[error("density underflow at x = {x}: f(x) = {pdf:e}")]
    DensityUnderflow { x: f64, pdf: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("receiver {0} is inactive; its SINR is undefined")]
    InactiveReceiver(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("exhaustive search over n = {n} pairs needs 2^{n} subsets; refusing above the guard n <= {guard}")]
    GuardExceeded { n: usize, guard: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
