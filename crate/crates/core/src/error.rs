use alloc::string::String;

/// Errors raised by the design library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Two evaluation routes that must agree did not.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("reflect power on RS{rs} is {power:.6e} W, budget {budget:.6e} W")]
    Infeasible { rs: usize, power: f64, budget: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
