//! Chat-completion access with full provenance.
//!
//! A [`Backend`] turns one rendered prompt into a [`Completion`]. Two
//! backends ship: [`HttpBackend`] speaks the OpenAI-compatible
//! `/v1/chat/completions` protocol (as served by llama.cpp and friends), and
//! [`ReplayBackend`] serves canned responses from a directory so that tests
//! and demonstrations run offline and deterministically.

mod batch;
mod http;
mod replay;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{ScenarioInput, ScenarioParams};

pub use batch::{run_batch, BatchFailure, BatchOutcome};
pub use http::{ChatMessage, ChatRequest, HttpBackend};
pub use replay::{ReplayBackend, ReplayMeta};

pub const DEFAULT_MAX_RESPONSE_TOKENS: u32 = 1024;
pub const DEFAULT_TEMPERATURE: f64 = 0.7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("transport error talking to {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error("server answered {status}: {body}")]
    Protocol { status: u16, body: String },
    #[error("malformed completion: {0}")]
    Decode(String),
    #[error("no replay response at {path}")]
    ReplayMissing { path: String },
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// One model behind one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub endpoint: String,
    #[serde(default = "default_max_tokens")]
    pub max_response_tokens: u32,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub seed: Option<i64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_max_tokens() -> u32 {
    DEFAULT_MAX_RESPONSE_TOKENS
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn default_parallelism() -> usize {
    1
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, endpoint: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            endpoint: endpoint.into(),
            max_response_tokens: DEFAULT_MAX_RESPONSE_TOKENS,
            temperature: DEFAULT_TEMPERATURE,
            seed: None,
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.name.trim().is_empty() {
            return Err(GatewayError::InvalidSpec("model name is empty".into()));
        }
        if self.max_response_tokens == 0 {
            return Err(GatewayError::InvalidSpec(format!(
                "{}: max_response_tokens must be at least 1",
                self.name
            )));
        }
        if self.parallelism == 0 {
            return Err(GatewayError::InvalidSpec(format!(
                "{}: parallelism must be at least 1",
                self.name
            )));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GatewayError::InvalidSpec(format!(
                "{}: temperature must be a non-negative number",
                self.name
            )));
        }
        Ok(())
    }
}

/// Why the model stopped writing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum FinishReason {
    Stop,
    /// The response hit the token budget and was cut off.
    Length,
    Other(String),
}

impl From<String> for FinishReason {
    fn from(s: String) -> Self {
        match s.as_str() {
            "stop" => FinishReason::Stop,
            "length" => FinishReason::Length,
            _ => FinishReason::Other(s),
        }
    }
}

impl From<FinishReason> for String {
    fn from(r: FinishReason) -> Self {
        r.to_string()
    }
}

impl fmt::Display for FinishReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FinishReason::Stop => f.write_str("stop"),
            FinishReason::Length => f.write_str("length"),
            FinishReason::Other(s) => f.write_str(s),
        }
    }
}

/// What a backend hands back for one request.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub finish_reason: FinishReason,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Server-side creation time, when the backend knows it.
    pub created_at: Option<DateTime<Utc>>,
}

/// Everything a backend may need to answer one prompt.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub spec: &'a ModelSpec,
    pub input: &'a ScenarioInput,
    pub round: u32,
    pub prompt: &'a str,
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &GenerationRequest<'_>) -> Result<Completion, GatewayError>;
}

/// One model response with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedScenario {
    pub preset_id: Option<u8>,
    pub params: ScenarioParams,
    pub model_name: String,
    pub round: u32,
    pub prompt_text: String,
    pub response_text: String,
    pub finish_reason: FinishReason,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Token budget of the producing spec.
    pub max_response_tokens: u32,
    pub created_at: DateTime<Utc>,
}

impl GeneratedScenario {
    pub fn input(&self) -> ScenarioInput {
        ScenarioInput { preset_id: self.preset_id, params: self.params.clone() }
    }

    /// Preset id, or the custom slug when the params were ad hoc.
    pub fn key(&self) -> String {
        self.input().key()
    }

    pub fn is_truncated(&self) -> bool {
        self.finish_reason == FinishReason::Length
    }
}

/// Sends one prompt and records the result.
///
/// Truncated responses are kept as they are; the finish reason records the
/// cut. A `length` finish always carries at least the spec's token budget as
/// its completion count, since the server stopped at that budget.
pub fn generate(
    backend: &dyn Backend,
    spec: &ModelSpec,
    input: &ScenarioInput,
    round: u32,
    prompt: &str,
) -> Result<GeneratedScenario, GatewayError> {
    spec.validate()?;
    if prompt.trim().is_empty() {
        return Err(GatewayError::InvalidRequest("prompt is empty".into()));
    }
    if round == 0 {
        return Err(GatewayError::InvalidRequest("rounds are numbered from 1".into()));
    }
    let request = GenerationRequest { spec, input, round, prompt };
    let completion = backend.complete(&request)?;
    if completion.text.is_empty() && !matches!(completion.finish_reason, FinishReason::Other(_)) {
        return Err(GatewayError::Decode(format!(
            "empty message content with finish_reason {}",
            completion.finish_reason
        )));
    }
    let completion_tokens = match completion.finish_reason {
        FinishReason::Length => completion.completion_tokens.max(u64::from(spec.max_response_tokens)),
        _ => completion.completion_tokens,
    };
    Ok(GeneratedScenario {
        preset_id: input.preset_id,
        params: input.params.clone(),
        model_name: spec.name.clone(),
        round,
        prompt_text: prompt.to_string(),
        response_text: completion.text,
        finish_reason: completion.finish_reason,
        prompt_tokens: completion.prompt_tokens,
        completion_tokens,
        max_response_tokens: spec.max_response_tokens,
        created_at: completion.created_at.unwrap_or_else(Utc::now),
    })
}
