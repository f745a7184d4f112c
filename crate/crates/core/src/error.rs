use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tail fit did not converge: r_max = {r_max} is too small, need at least {required}")]
    RmaxTooSmall { r_max: f64, required: f64 },

    #[error("singular dressing: 1 - w_N = {value:e} at pair distance {distance}")]
    SingularDressing { distance: f64, value: f64 },

    #[error("memory budget exceeded: need {required} bytes, budget is {budget} bytes")]
    MemoryBudget { required: u64, budget: u64 },

    #[error("size refusal: would produce {count} items (limit {limit})")]
    SizeRefusal { count: u128, limit: u128 },

    #[error("divergent sum: {0}")]
    Divergent(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
