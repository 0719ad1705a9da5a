use std::fmt;
use std::io;

use surplus_consensus::Error;

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed graph file.
    Graph(Error),
    NotStronglyConnected(String),
    Config(Error),
    /// Named verification checks that failed.
    ChecksFailed(Vec<String>),
    Compute(Error),
    Io(String, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Graph(_) => 2,
            CliError::NotStronglyConnected(_) => 3,
            CliError::Config(_) => 4,
            CliError::ChecksFailed(_) | CliError::Compute(_) | CliError::Io(..) => 1,
        }
    }

    pub fn io(what: impl Into<String>) -> impl FnOnce(io::Error) -> Self {
        let what = what.into();
        move |e| CliError::Io(what, e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidEdge { .. } | Error::SelfLoopRejected(_) => {
                CliError::Graph(e)
            }
            Error::InvalidConfig(_) => CliError::Config(e),
            other => CliError::Compute(other),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Graph(e) => write!(f, "cannot load graph: {e}"),
            CliError::NotStronglyConnected(msg) => write!(f, "{msg}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::ChecksFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(what, e) => write!(f, "{what}: {e}"),
        }
    }
}
