use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} {value} out of range [{start}, {end})")]
    Range {
        what: &'static str,
        value: String,
        start: String,
        end: String,
    },

    #[error("invalid {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("{object} is not in the support of the table (CTM undefined at this space and budget)")]
    NotInSupport { object: String },

    #[error("{rows}x{cols} input is not divisible into blocks of size {block_size}: remainder {row_remainder} rows, {col_remainder} columns")]
    Dimension {
        rows: usize,
        cols: usize,
        block_size: usize,
        row_remainder: usize,
        col_remainder: usize,
    },

    #[error("{} block(s) missing from the base table: {}", .0.len(), .0.join(" "))]
    MissingBlocks(Vec<String>),

    #[error("no edge between vertices {0} and {1}")]
    NoSuchEdge(usize, usize),

    #[error("no halting machines in the given records")]
    NoHaltingMachines,

    #[error("range of {needed} machines exceeds the {capacity}-cell capacity of a level-{level} Peano grid; use level {suggested} or higher")]
    Capacity {
        needed: u128,
        capacity: u128,
        level: u32,
        suggested: u32,
    },

    #[error("{}line {line}: {message}", .path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(
        what: &'static str,
        value: impl ToString,
        start: impl ToString,
        end: impl ToString,
    ) -> Self {
        Error::Range {
            what,
            value: value.to_string(),
            start: start.to_string(),
            end: end.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file path to a parse error raised while reading that file.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(p.into()),
                line,
                message,
            },
            other => other,
        }
    }

    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range { .. } => "range",
            Error::Validation(_) => "validation",
            Error::Unsupported(_) => "unsupported",
            Error::Consistency(_) => "consistency",
            Error::NotInSupport { .. } => "not_in_support",
            Error::Dimension { .. } => "dimension",
            Error::MissingBlocks(_) => "missing_blocks",
            Error::NoSuchEdge(..) => "no_such_edge",
            Error::NoHaltingMachines => "no_halting_machines",
            Error::Capacity { .. } => "capacity",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }
}
