//! Client for an external embedding service.
//!
//! Wire contract: `POST <endpoint>` with body `{"model": ..., "inputs": [...]}`,
//! answered by `{"vectors": [[...], ...]}` in input order. Non-200 responses
//! and transport failures are retried with exponential backoff.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait EmbeddingService {
    /// Embed `inputs` with `model`, returning one vector per input in order.
    fn embed(&self, model: &str, inputs: &[String]) -> Result<Vec<Vec<f32>>>;
}

#[derive(Debug, Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    inputs: &'a [String],
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

pub const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone)]
pub struct HttpEmbeddingService {
    endpoint: String,
    client: reqwest::blocking::Client,
    initial_backoff: Duration,
}

impl HttpEmbeddingService {
    pub fn new(endpoint: impl Into<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Service(e.to_string()))?;
        Ok(HttpEmbeddingService {
            endpoint: endpoint.into(),
            client,
            initial_backoff: Duration::from_millis(200),
        })
    }

    /// Delay before the second attempt; doubles after each failure.
    pub fn with_initial_backoff(mut self, backoff: Duration) -> Self {
        self.initial_backoff = backoff;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, body: &EmbedRequest<'_>) -> Result<Vec<Vec<f32>>> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(body)
            .send()
            .map_err(|e| Error::Service(format!("request to {} failed: {e}", self.endpoint)))?;
        let status = response.status();
        if status != reqwest::StatusCode::OK {
            return Err(Error::Service(format!(
                "{} returned {status}",
                self.endpoint
            )));
        }
        let parsed: EmbedResponse = response
            .json()
            .map_err(|e| Error::Service(format!("malformed response body: {e}")))?;
        Ok(parsed.vectors)
    }
}

impl EmbeddingService for HttpEmbeddingService {
    fn embed(&self, model: &str, inputs: &[String]) -> Result<Vec<Vec<f32>>> {
        let body = EmbedRequest { model, inputs };
        let mut backoff = self.initial_backoff;
        let mut attempt = 1;
        let vectors = loop {
            match self.attempt(&body) {
                Ok(v) => break v,
                Err(e) if attempt >= MAX_ATTEMPTS => {
                    return Err(Error::Service(format!("{e} (after {attempt} attempts)")))
                }
                Err(_) => {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
            }
        };
        if vectors.len() != inputs.len() {
            return Err(Error::Service(format!(
                "sent {} inputs, received {} vectors",
                inputs.len(),
                vectors.len()
            )));
        }
        Ok(vectors)
    }
}
