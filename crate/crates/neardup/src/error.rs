use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] neardup_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Data(String),
    #[error("store {path}: {message}")]
    Store { path: PathBuf, message: String },
    #[error("band {0} does not exist")]
    UnknownBand(usize),
    #[error("band {band}: missing part {part}")]
    MissingPart { band: usize, part: usize },
}

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub fn store(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Store { path: path.into(), message: message.into() }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 storage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Core(neardup_core::Error::InvalidParams(_))
            | Error::Core(neardup_core::Error::InvalidClusterConfig(_))
            | Error::Core(neardup_core::Error::EmptyHashFamily)
            | Error::Core(neardup_core::Error::InvalidSynthSpec(_)) => 1,
            Error::Core(_) | Error::Parse { .. } | Error::Data(_) => 2,
            Error::Io { .. } | Error::Store { .. } | Error::UnknownBand(_) | Error::MissingPart { .. } => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Attaches a context string to IO errors.
pub(crate) trait IoContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| Error::io(what(), e))
    }
}
