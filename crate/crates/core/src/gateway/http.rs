use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Backend, Completion, FinishReason, GatewayError, GenerationRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Body of `POST /v1/chat/completions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub max_tokens: u32,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<i64>,
}

impl ChatRequest {
    /// A single user message carrying the prompt; no system message.
    pub fn from_request(request: &GenerationRequest<'_>) -> Self {
        Self {
            model: request.spec.name.clone(),
            messages: vec![ChatMessage { role: "user".into(), content: request.prompt.into() }],
            max_tokens: request.spec.max_response_tokens,
            temperature: request.spec.temperature,
            seed: request.spec.seed,
        }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
    #[serde(default)]
    created: Option<i64>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Decodes a chat-completion response body.
pub(crate) fn decode_response(body: &str) -> Result<Completion, GatewayError> {
    let parsed: ChatResponse =
        serde_json::from_str(body).map_err(|e| GatewayError::Decode(e.to_string()))?;
    let choice = parsed
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| GatewayError::Decode("response has no choices".into()))?;
    let usage = parsed.usage.unwrap_or(Usage { prompt_tokens: 0, completion_tokens: 0 });
    Ok(Completion {
        text: choice.message.content.unwrap_or_default(),
        finish_reason: choice
            .finish_reason
            .map(FinishReason::from)
            .unwrap_or_else(|| FinishReason::Other("unknown".into())),
        prompt_tokens: usage.prompt_tokens,
        completion_tokens: usage.completion_tokens,
        created_at: parsed.created.and_then(|s| DateTime::<Utc>::from_timestamp(s, 0)),
    })
}

/// Blocking client for OpenAI-compatible servers.
///
/// Each request goes to `{spec.endpoint}/v1/chat/completions`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self { agent, api_key: None }
    }

    /// Sends `Authorization: Bearer <key>` with every request.
    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn url(endpoint: &str) -> String {
        format!("{}/v1/chat/completions", endpoint.trim_end_matches('/'))
    }
}

impl Default for HttpBackend {
    fn default() -> Self {
        Self::new(Duration::from_secs(600))
    }
}

impl Backend for HttpBackend {
    fn complete(&self, request: &GenerationRequest<'_>) -> Result<Completion, GatewayError> {
        let endpoint = &request.spec.endpoint;
        let url = Self::url(endpoint);
        let body = serde_json::to_string(&ChatRequest::from_request(request))
            .map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
        let transport = |e: ureq::Error| GatewayError::Transport {
            endpoint: endpoint.clone(),
            message: e.to_string(),
        };

        let mut call = self.agent.post(&url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call.send(body.as_str()).map_err(transport)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(transport)?;
        if !(200..300).contains(&status) {
            return Err(GatewayError::Protocol { status, body: text });
        }
        decode_response(&text)
    }
}
