use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series has zero constant term and cannot be inverted")]
    NotInvertible,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} = {value} is outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("{what}: requested {requested} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("{what} did not converge (last change {last_change:e})")]
    NotConverged { what: &'static str, last_change: f64 },
    #[error("quadrature failed to reach tolerance {tol:e}: estimate {estimate} with error {error:e}")]
    Tolerance { tol: f64, estimate: f64, error: f64 },
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("input rejected: {0}")]
    Rejected(String),
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("sampler gave up after {attempts} attempts (acceptance rate {acceptance_rate:.3e})")]
    SamplerExhausted { attempts: u64, acceptance_rate: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
