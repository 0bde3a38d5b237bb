use std::path::{Component, Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Backend, Completion, FinishReason, GatewayError, GenerationRequest};

/// Optional sidecar next to a canned response, `{key}-{round}.json`.
///
/// Missing fields fall back to: finish reason `stop`, whitespace word counts
/// for both token fields, and the Unix epoch as creation time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayMeta {
    #[serde(default)]
    pub finish_reason: Option<FinishReason>,
    #[serde(default)]
    pub prompt_tokens: Option<u64>,
    #[serde(default)]
    pub completion_tokens: Option<u64>,
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

/// Serves responses from `{root}/{model_name}/{key}-{round}.txt`, where
/// `key` is the preset id (or custom slug) of the input.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    root: PathBuf,
}

impl ReplayBackend {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path of the canned text for one request.
    pub fn response_path(&self, model_name: &str, key: &str, round: u32) -> Result<PathBuf, GatewayError> {
        let model = Path::new(model_name);
        let safe = model
            .components()
            .all(|c| matches!(c, Component::Normal(_)));
        if !safe || model_name.is_empty() {
            return Err(GatewayError::InvalidRequest(format!(
                "model name {model_name:?} cannot be used as a replay directory"
            )));
        }
        Ok(self.root.join(model).join(format!("{key}-{round}.txt")))
    }

    /// Model directories present under the root, sorted by name.
    pub fn discover_models(&self) -> std::io::Result<Vec<String>> {
        let mut names = Vec::new();
        for entry in std::fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                if let Some(name) = entry.file_name().to_str() {
                    names.push(name.to_string());
                }
            }
        }
        names.sort();
        Ok(names)
    }
}

fn word_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

impl Backend for ReplayBackend {
    fn complete(&self, request: &GenerationRequest<'_>) -> Result<Completion, GatewayError> {
        let path = self.response_path(&request.spec.name, &request.input.key(), request.round)?;
        let text = std::fs::read_to_string(&path)
            .map_err(|_| GatewayError::ReplayMissing { path: path.display().to_string() })?;
        let meta_path = path.with_extension("json");
        let meta: ReplayMeta = match std::fs::read_to_string(&meta_path) {
            Ok(json) => serde_json::from_str(&json).map_err(|e| {
                GatewayError::Decode(format!("{}: {e}", meta_path.display()))
            })?,
            Err(_) => ReplayMeta::default(),
        };
        Ok(Completion {
            finish_reason: meta.finish_reason.unwrap_or(FinishReason::Stop),
            prompt_tokens: meta.prompt_tokens.unwrap_or_else(|| word_count(request.prompt)),
            completion_tokens: meta.completion_tokens.unwrap_or_else(|| word_count(&text)),
            created_at: Some(meta.created_at.unwrap_or(DateTime::UNIX_EPOCH)),
            text,
        })
    }
}
