use std::path::PathBuf;

use pvlc_core::channel::ChannelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed JSON; `at` is the path of the offending value.
    #[error("{file}: at `{at}`: {message}")]
    Json {
        file: String,
        at: String,
        message: String,
    },
    #[error("{file}: line {line}: {message}")]
    Trace {
        file: String,
        line: u64,
        message: String,
    },
    /// Well-formed scenario with an invalid value at `at`.
    #[error("{file}: at `{at}`: {source}")]
    Scenario {
        file: String,
        at: String,
        source: ChannelError,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Deserializes JSON, reporting the path of the first offending value.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str, file: &str) -> Result<T, Error> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        file: file.to_string(),
        at: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}
