use thiserror::Error;

/// Errors raised across the simulation and pricing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid market state: {0}")]
    State(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("posterior underflow: every weight vanished (max log-kernel {max_log_kernel})")]
    Underflow { max_log_kernel: f64 },

    #[error("payoff not integrable: {0}")]
    Integrability(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("statistical test error: {0}")]
    Stats(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
