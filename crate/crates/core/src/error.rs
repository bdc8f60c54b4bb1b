use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid config `{param}`: {reason}")]
    InvalidConfig { param: &'static str, reason: String },

    #[error("packing infeasible, limited by `{parameter}`: {detail}")]
    PackingInfeasible { parameter: &'static str, detail: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("time step {dt} exceeds stability limit {limit} ({what})")]
    Unstable { what: &'static str, dt: f64, limit: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series shape mismatch: {0}")]
    Shape(String),

    #[error("undefined percentage: baseline {0} is zero")]
    UndefinedPercentage(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn config(param: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
