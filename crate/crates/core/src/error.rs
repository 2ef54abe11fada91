use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("m.g.f. argument {u} is outside the convergence region (must be < {bound})")]
    MgfDomain { u: f64, bound: f64 },

    #[error("moment order {0} is not supported (expected 1 or 2)")]
    MomentOrder(u32),

    #[error("intensity {rate} at time {time} exceeds the thinning bound {bound}")]
    RateBoundExceeded { time: f64, rate: f64, bound: f64 },

    #[error("time {time} is outside [0, {horizon}]")]
    OutOfRange { time: f64, horizon: f64 },

    #[error("trip log line {line}: {message}")]
    TripLog { line: usize, message: String },

    #[error("simulation result carries no per-path trace; enable full_trace")]
    MissingTrace,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
