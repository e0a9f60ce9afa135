use crate::providers::ProviderKind;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] newsreel_core::Error),
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("no recorded {kind} response for `{tag}` (digest {digest})")]
    CassetteMiss { kind: ProviderKind, tag: String, digest: String },
    #[error("provider returned an empty completion for `{0}`")]
    EmptyCompletion(String),
    #[error("project `{0}` not found")]
    NotFound(String),
    #[error("stored data is corrupt: {0}")]
    StorageCorrupt(String),
    #[error("project `{0}` is locked by another writer")]
    Locked(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Core(e) => e.code(),
            Error::ProviderUnavailable(_) => "provider_unavailable",
            Error::CassetteMiss { .. } => "cassette_miss",
            Error::EmptyCompletion(_) => "empty_completion",
            Error::NotFound(_) => "not_found",
            Error::StorageCorrupt(_) => "storage_corrupt",
            Error::Locked(_) => "locked",
            Error::Format(_) => "format_error",
            Error::Io(_) => "io_failure",
        }
    }

    pub(crate) fn invalid(field: &str, rule: &str) -> Self {
        Error::Core(newsreel_core::Error::Validation(vec![newsreel_core::Violation::new(field, rule)]))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
