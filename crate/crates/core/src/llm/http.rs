use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{ChatBackend, FinishReason, LlmError, LlmRequest, LlmResponse};

const EXCERPT_LEN: usize = 300;

/// OpenAI-style `POST <base_url>/v1/chat/completions`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(base_url: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            agent,
            url: format!("{}/v1/chat/completions", base_url.trim_end_matches('/')),
            api_key,
        }
    }

    /// Endpoint from the argument or `LLM_ENDPOINT`, key from `LLM_API_KEY`.
    pub fn from_env(endpoint: Option<&str>, timeout: Duration) -> Result<Self, LlmError> {
        let base = match endpoint {
            Some(e) => e.to_string(),
            None => std::env::var("LLM_ENDPOINT")
                .map_err(|_| LlmError::Config("no endpoint given and LLM_ENDPOINT is unset".into()))?,
        };
        Ok(Self::new(&base, std::env::var("LLM_API_KEY").ok(), timeout))
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

/// Request body in the chat-completions wire format.
pub fn request_body(req: &LlmRequest) -> Value {
    json!({
        "model": req.model_name,
        "messages": req.turns,
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    })
}

fn excerpt(body: &str) -> String {
    match body.char_indices().nth(EXCERPT_LEN) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_string(),
    }
}

fn parse_completion(body: &str) -> Result<(String, FinishReason), LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::Protocol(format!("{e}: {}", excerpt(body))))?;
    let choice = v
        .pointer("/choices/0")
        .ok_or_else(|| LlmError::Protocol(format!("no choices in response: {}", excerpt(body))))?;
    let finish = FinishReason::from_api(choice.get("finish_reason").and_then(Value::as_str));
    match choice.pointer("/message/content").and_then(Value::as_str) {
        Some(text) => Ok((text.to_string(), finish)),
        None if finish != FinishReason::Stop => Ok((String::new(), finish)),
        None => Err(LlmError::Protocol("choice has no message content".into())),
    }
}

impl ChatBackend for HttpBackend {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let start = Instant::now();
        let mut call = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call.send_json(request_body(req)).map_err(map_transport)?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(map_transport)?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Status { status, body_excerpt: excerpt(&body), attempts: 1 });
        }
        let (text, finish_reason) = parse_completion(&body)?;
        Ok(LlmResponse {
            text,
            finish_reason,
            latency: start.elapsed(),
            raw_payload: body.into_bytes(),
        })
    }

    fn describe(&self) -> String {
        format!("http:{}", self.url)
    }
}

fn map_transport(e: ureq::Error) -> LlmError {
    match e {
        ureq::Error::Timeout(_) => LlmError::Timeout { attempts: 1 },
        other => LlmError::Transport { attempts: 1, message: other.to_string() },
    }
}
