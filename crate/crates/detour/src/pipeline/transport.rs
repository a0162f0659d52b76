//! Pluggable HTTP transport, so replay runs can prove they never touch the
//! network and tests can script responses.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

/// A provider-shaped HTTP request, ready to send.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    /// Header name/value pairs; auth material goes here.
    pub headers: Vec<(String, String)>,
    pub body: serde_json::Value,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    #[error("network error: {0}")]
    Network(String),
    #[error("rate limited by the provider")]
    RateLimited,
    #[error("authentication rejected: {0}")]
    AuthRejected(String),
}

pub trait Transport: Send + Sync {
    fn execute(&self, request: &HttpRequest) -> Result<String, TransportError>;
}

/// Real HTTP transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Self {
        Self {
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for HttpTransport {
    fn execute(&self, request: &HttpRequest) -> Result<String, TransportError> {
        let mut builder = self.client.post(&request.url).json(&request.body);
        for (name, value) in &request.headers {
            builder = builder.header(name, value);
        }
        let response = builder
            .send()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        if status.as_u16() == 429 {
            return Err(TransportError::RateLimited);
        }
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(TransportError::AuthRejected(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let excerpt: String = text.chars().take(200).collect();
            return Err(TransportError::Network(format!("HTTP {status}: {excerpt}")));
        }
        Ok(text)
    }
}

/// Counts every network attempt, optionally delegating to an inner
/// transport. With no inner transport, any attempt fails — which is exactly
/// what a replay run should look like.
pub struct RecordingTransport {
    inner: Option<Box<dyn Transport>>,
    calls: AtomicUsize,
}

impl RecordingTransport {
    /// A transport that refuses (and counts) every network operation.
    pub fn refusing() -> Self {
        Self {
            inner: None,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn wrapping(inner: Box<dyn Transport>) -> Self {
        Self {
            inner: Some(inner),
            calls: AtomicUsize::new(0),
        }
    }

    /// Number of network operations attempted through this transport.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for RecordingTransport {
    fn execute(&self, request: &HttpRequest) -> Result<String, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        match &self.inner {
            Some(inner) => inner.execute(request),
            None => Err(TransportError::Network(
                "network disabled for this run".to_string(),
            )),
        }
    }
}

/// Returns pre-scripted responses in order; errors once the script runs out.
/// Also retains every request it saw, for assertions.
pub struct ScriptedTransport {
    script: Mutex<std::collections::VecDeque<Result<String, TransportError>>>,
    seen: Mutex<Vec<HttpRequest>>,
}

impl ScriptedTransport {
    pub fn new(responses: Vec<Result<String, TransportError>>) -> Self {
        Self {
            script: Mutex::new(responses.into()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<HttpRequest> {
        self.seen.lock().expect("transport lock poisoned").clone()
    }
}

impl Transport for ScriptedTransport {
    fn execute(&self, request: &HttpRequest) -> Result<String, TransportError> {
        self.seen
            .lock()
            .expect("transport lock poisoned")
            .push(request.clone());
        self.script
            .lock()
            .expect("transport lock poisoned")
            .pop_front()
            .unwrap_or_else(|| Err(TransportError::Network("script exhausted".to_string())))
    }
}
