use std::path::Path;

use grace_core::data::DataError;
use grace_core::eval::EvalError;
use grace_core::llm::LlmError;
use grace_core::net::NetError;
use grace_core::uncertainty::UncertaintyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("missing {what}: {path}")]
    MissingArtifact { what: String, path: String },
    #[error("{0}")]
    ProviderUnavailable(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::MissingArtifact { .. } => 3,
            CliError::ProviderUnavailable(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::MissingArtifact { .. } => "missing_artifact",
            CliError::ProviderUnavailable(_) => "provider_unavailable",
            CliError::Other(_) => "error",
        }
    }

    /// One JSON object per line on stderr.
    pub fn diagnostic(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::MissingArtifact { what, path } = self {
            v["artifact"] = what.clone().into();
            v["path"] = path.clone().into();
        }
        v.to_string()
    }

    pub fn missing(what: &str, path: &Path) -> Self {
        CliError::MissingArtifact {
            what: what.to_string(),
            path: path.display().to_string(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::missing("file", path)
        } else {
            CliError::Other(format!("{}: {e}", path.display()))
        }
    }
}

fn not_found(e: &std::io::Error) -> bool {
    e.kind() == std::io::ErrorKind::NotFound
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match &e {
            DataError::Io { path, source } if not_found(source) => CliError::MissingArtifact {
                what: "dataset file".into(),
                path: path.clone(),
            },
            DataError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::ProviderUnavailable { .. } => CliError::ProviderUnavailable(e.to_string()),
            LlmError::Cache { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match &e {
            NetError::Io { path, source } if not_found(source) => CliError::MissingArtifact {
                what: "model".into(),
                path: path.clone(),
            },
            NetError::InvalidConfig(_) | NetError::ShapeMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<UncertaintyError> for CliError {
    fn from(e: UncertaintyError) -> Self {
        match &e {
            UncertaintyError::Io { path, source } if not_found(source) => {
                CliError::MissingArtifact {
                    what: "classifier model".into(),
                    path: path.clone(),
                }
            }
            UncertaintyError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Data(e) => e.into(),
            EvalError::Net(e) => e.into(),
            EvalError::Uncertainty(e) => e.into(),
            EvalError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
