use thiserror::Error;

/// Every failure the library reports, grouped by how the CLI maps it to an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validity violation: {0}")]
    Validity(String),

    #[error("budget exceeded after {nodes} search nodes (partial lower bound {lower_bound})")]
    Budget { nodes: u64, lower_bound: u64 },

    #[error("simulation fault at {position}: {rule}")]
    Fault { position: String, rule: String },

    #[error("timeout after {rows} rows without reaching phase 2")]
    Timeout { rows: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn validity(msg: impl Into<String>) -> Self {
        Error::Validity(msg.into())
    }

    pub fn fault(position: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::Fault {
            position: position.into(),
            rule: rule.into(),
        }
    }

    /// Process exit code used by the `lamp` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::Validity(_) | Error::Fault { .. } | Error::Timeout { .. } => 1,
            Error::Budget { .. } => 3,
        }
    }
}
