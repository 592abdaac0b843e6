use std::path::Path;

/// Errors of the harness. Every validation failure names the module whose
/// precondition failed and the config field that caused it.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{module}: invalid `{field}`: {message}")]
    Invalid {
        module: &'static str,
        field: String,
        message: String,
    },
    #[error("{module}: `{field}`: {source}")]
    Core {
        module: &'static str,
        field: String,
        #[source]
        source: twlip_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn invalid(module: &'static str, field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Invalid {
            module,
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        HarnessError::Csv {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Attaches module and field to a core error.
pub(crate) trait Context<T> {
    fn at(self, module: &'static str, field: &str) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, twlip_core::Error> {
    fn at(self, module: &'static str, field: &str) -> Result<T> {
        self.map_err(|source| HarnessError::Core {
            module,
            field: field.to_string(),
            source,
        })
    }
}
