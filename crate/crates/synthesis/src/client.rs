//! Chat-completion transport.
//!
//! Request body: `{"model": str, "messages": [{"role", "content"}], "temperature": f64}`.
//! The reply text is read from `choices[0].message.content` or, for simpler
//! servers, a top-level `text` field.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::SynthesisConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("transport: {0}")]
pub struct TransportError(pub String);

pub trait ChatModel: Sync {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError>;
}

#[derive(Serialize)]
struct Request<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
}

/// A JSON-over-HTTP chat endpoint.
pub struct HttpChatModel {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

impl HttpChatModel {
    pub fn new(config: &SynthesisConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(config.timeout_s)).build();
        HttpChatModel {
            agent,
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            temperature: config.temperature,
            api_key: std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty()),
        }
    }
}

fn reply_text(body: &serde_json::Value) -> Option<String> {
    body.pointer("/choices/0/message/content")
        .or_else(|| body.get("text"))
        .and_then(|v| v.as_str())
        .map(str::to_owned)
}

impl ChatModel for HttpChatModel {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let body = Request { model: &self.model, messages, temperature: self.temperature };
        let resp = req.send_json(&body).map_err(|e| TransportError(e.to_string()))?;
        let value: serde_json::Value = resp.into_json().map_err(|e| TransportError(e.to_string()))?;
        reply_text(&value).ok_or_else(|| TransportError(format!("no reply text in response: {value}")))
    }
}

/// Replays fixed replies in order, repeating the last one. Records every request.
pub struct ScriptedModel {
    replies: Vec<String>,
    next: AtomicUsize,
    seen: Mutex<Vec<Vec<Message>>>,
}

impl ScriptedModel {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        let replies: Vec<String> = replies.into_iter().map(Into::into).collect();
        assert!(!replies.is_empty(), "scripted model needs at least one reply");
        ScriptedModel { replies, next: AtomicUsize::new(0), seen: Mutex::new(Vec::new()) }
    }

    pub fn calls(&self) -> usize {
        self.seen.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<Vec<Message>> {
        self.seen.lock().unwrap().clone()
    }
}

impl ChatModel for ScriptedModel {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        self.seen.lock().unwrap().push(messages.to_vec());
        let i = self.next.fetch_add(1, Ordering::SeqCst).min(self.replies.len() - 1);
        Ok(self.replies[i].clone())
    }
}

/// Spaces requests to at most `per_minute`.
pub struct RateLimited<M> {
    inner: M,
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl<M: ChatModel> RateLimited<M> {
    pub fn new(inner: M, per_minute: f64) -> Self {
        assert!(per_minute > 0.0, "rate must be positive");
        RateLimited { inner, interval: Duration::from_secs_f64(60.0 / per_minute), last: Mutex::new(None) }
    }
}

impl<M: ChatModel> ChatModel for RateLimited<M> {
    fn complete(&self, messages: &[Message]) -> Result<String, TransportError> {
        {
            let mut last = self.last.lock().unwrap();
            if let Some(prev) = *last {
                let wait = self.interval.saturating_sub(prev.elapsed());
                std::thread::sleep(wait);
            }
            *last = Some(Instant::now());
        }
        self.inner.complete(messages)
    }
}
