use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::llm::backend::{Backend, RemoteBackend, RemoteConfig, ScriptError, ScriptedBackend};
use crate::llm::gateway::RetryPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Scripted,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(BackendKind::Remote),
            "scripted" => Ok(BackendKind::Scripted),
            other => Err(format!(
                "unknown llm backend {other:?} (expected remote or scripted)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmSettings {
    pub backend: BackendKind,
    #[serde(flatten)]
    pub remote: RemoteConfig,
    pub script: Option<PathBuf>,
    pub retry: RetryPolicy,
}

impl Default for LlmSettings {
    fn default() -> Self {
        Self {
            backend: BackendKind::Remote,
            remote: RemoteConfig::default(),
            script: None,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SettingsError {
    #[error("scripted backend needs a script file")]
    MissingScript,
    #[error(transparent)]
    Script(#[from] ScriptError),
}

impl LlmSettings {
    pub fn build_backend(&self) -> Result<Box<dyn Backend>, SettingsError> {
        match self.backend {
            BackendKind::Remote => Ok(Box::new(RemoteBackend::new(self.remote.clone()))),
            BackendKind::Scripted => {
                let path = self.script.as_ref().ok_or(SettingsError::MissingScript)?;
                Ok(Box::new(ScriptedBackend::from_jsonl(path)?))
            }
        }
    }
}
