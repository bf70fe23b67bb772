//! Chat-completion client: one trait for backends, retrying single calls and
//! order-preserving bounded batches on top of it.

mod batch;
mod http;
mod mock;

pub use batch::{complete, complete_batch, ConcurrencyPolicy, RetryPolicy};
pub use http::{request_body, HttpBackend};
pub use mock::{MockBackend, MockBehavior, MockMode, ScoreFn, ACKNOWLEDGEMENT};

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::prompt::ChatTurn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_name: String,
    pub turns: Vec<ChatTurn>,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Utterance id the request belongs to.
    pub request_tag: String,
}

impl LlmRequest {
    pub fn new(model_name: impl Into<String>, request_tag: impl Into<String>, turns: Vec<ChatTurn>) -> Self {
        LlmRequest {
            model_name: model_name.into(),
            turns,
            temperature: 0.0,
            max_tokens: 512,
            request_tag: request_tag.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

impl FinishReason {
    fn from_api(s: Option<&str>) -> Self {
        match s {
            Some("stop") | None => FinishReason::Stop,
            Some("length") => FinishReason::Length,
            Some(_) => FinishReason::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmResponse {
    pub text: String,
    pub finish_reason: FinishReason,
    pub latency: Duration,
    /// Response body as received, kept for auditing.
    pub raw_payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status} after {attempts} attempt(s): {body_excerpt}")]
    Status { status: u16, body_excerpt: String, attempts: u32 },
    #[error("timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("mock backend: {0}")]
    Mock(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("cancelled after an earlier failure")]
    Cancelled,
}

impl LlmError {
    /// Transport failures, 5xx and timeouts are retried; everything else surfaces.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Transport { .. } | LlmError::Timeout { .. } => true,
            LlmError::Status { status, .. } => *status >= 500,
            _ => false,
        }
    }

    pub fn attempts(&self) -> Option<u32> {
        match self {
            LlmError::Transport { attempts, .. } | LlmError::Status { attempts, .. } | LlmError::Timeout { attempts } => {
                Some(*attempts)
            }
            _ => None,
        }
    }

    fn with_attempts(mut self, n: u32) -> Self {
        match &mut self {
            LlmError::Transport { attempts, .. } | LlmError::Status { attempts, .. } | LlmError::Timeout { attempts } => {
                *attempts = n
            }
            _ => {}
        }
        self
    }
}

/// A chat-completion endpoint. `send` makes exactly one attempt.
pub trait ChatBackend: Send + Sync {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError>;

    /// Short description for run provenance.
    fn describe(&self) -> String;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).send(req)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).send(req)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}
