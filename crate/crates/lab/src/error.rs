use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config field `{field}`: {message}")]
    Usage { field: String, message: String },
    #[error(transparent)]
    Core(#[from] hdickman_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("prime cache {path}: {message}")]
    Cache { path: String, message: String },
}

impl LabError {
    pub(crate) fn usage(field: &str, message: impl Into<String>) -> Self {
        LabError::Usage { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io { path: path.as_ref().display().to_string(), source }
    }
}
