use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    ConflictingObservation(Box<Conflict>),

    #[error("{path}:{line}: unknown node {node:?}")]
    UnknownNode {
        path: PathBuf,
        line: usize,
        node: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("cannot project an empty vector onto the simplex")]
    EmptyVector,

    #[error("infeasible generator config: {0}")]
    Infeasible(String),

    #[error("invalid config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
}

/// Two different labels given for the same (node, type) pair.
#[derive(Debug)]
pub struct Conflict {
    pub path: PathBuf,
    pub line: usize,
    pub node: String,
    pub label_type: String,
    pub first: String,
    pub second: String,
}

impl std::fmt::Display for Conflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}: conflicting observation for node {:?}, type {:?}: {:?} vs {:?}",
            self.path.display(),
            self.line,
            self.node,
            self.label_type,
            self.first,
            self.second
        )
    }
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
