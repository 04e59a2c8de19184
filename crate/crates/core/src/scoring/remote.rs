//! HTTP clients for external health and frame classifiers.
//!
//! Health: `POST {"texts": [..]}` answered by `{"scores": [..]}`.
//! Frames: `POST {"texts": [..]}` answered by
//! `{"frames": [[{"label": .., "confidence": ..}, ..], ..]}` with candidates
//! per sentence; the most confident candidate is used.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use ureq::Agent;

use super::{FrameScorer, HealthScorer, Result, ScorerConfig, ScoringError};
use crate::framing::FrameLabel;

/// A JSON-over-HTTP POST client shared by the scorer and generator clients.
#[derive(Debug, Clone)]
pub struct JsonClient {
    agent: Agent,
    endpoint: String,
    timeout: Duration,
}

impl JsonClient {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            endpoint: endpoint.into(),
            timeout,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn post(&self, body: &serde_json::Value) -> Result<serde_json::Value> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(body)
            .map_err(|e| self.transport(e))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ScoringError::Http {
                endpoint: self.endpoint.clone(),
                status,
            });
        }
        resp.body_mut()
            .read_json::<serde_json::Value>()
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => self.transport(e),
                other => ScoringError::Malformed(other.to_string()),
            })
    }

    fn transport(&self, e: ureq::Error) -> ScoringError {
        match e {
            ureq::Error::Timeout(_) => ScoringError::Timeout {
                endpoint: self.endpoint.clone(),
                timeout_ms: self.timeout.as_millis() as u64,
            },
            ureq::Error::StatusCode(status) => ScoringError::Http {
                endpoint: self.endpoint.clone(),
                status,
            },
            other => ScoringError::Transport {
                endpoint: self.endpoint.clone(),
                message: other.to_string(),
            },
        }
    }
}

fn remote_client(cfg: &ScorerConfig) -> Result<(JsonClient, usize)> {
    cfg.validate()?;
    let endpoint = cfg
        .endpoint
        .clone()
        .ok_or_else(|| ScoringError::Config("remote scorer needs an endpoint".into()))?;
    Ok((JsonClient::new(endpoint, cfg.timeout()), cfg.batch_size))
}

/// Sends `texts` in chunks of `batch_size` and concatenates the results in
/// input order, checking that every chunk returns one result per text.
fn batched<T>(texts: &[String], batch_size: usize, mut call: impl FnMut(&[String]) -> Result<Vec<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(batch_size.max(1)) {
        let got = call(chunk)?;
        if got.len() != chunk.len() {
            return Err(ScoringError::CountMismatch {
                expected: chunk.len(),
                got: got.len(),
            });
        }
        out.extend(got);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RemoteHealthScorer {
    client: JsonClient,
    batch_size: usize,
}

impl RemoteHealthScorer {
    pub fn new(cfg: &ScorerConfig) -> Result<Self> {
        let (client, batch_size) = remote_client(cfg)?;
        Ok(Self { client, batch_size })
    }
}

#[derive(Deserialize)]
struct ScoresPayload {
    scores: Vec<f64>,
}

impl HealthScorer for RemoteHealthScorer {
    fn score_batch(&self, texts: &[String]) -> Result<Vec<f64>> {
        batched(texts, self.batch_size, |chunk| {
            let value = self.client.post(&json!({ "texts": chunk }))?;
            let payload: ScoresPayload =
                serde_json::from_value(value).map_err(|e| ScoringError::Malformed(e.to_string()))?;
            if let Some(bad) = payload.scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(ScoringError::Malformed(format!("score {bad} outside [0, 1]")));
            }
            Ok(payload.scores)
        })
    }

    fn describe(&self) -> String {
        format!("remote-health({})", self.client.endpoint())
    }
}

#[derive(Debug, Clone)]
pub struct RemoteFrameScorer {
    client: JsonClient,
    batch_size: usize,
}

impl RemoteFrameScorer {
    pub fn new(cfg: &ScorerConfig) -> Result<Self> {
        let (client, batch_size) = remote_client(cfg)?;
        Ok(Self { client, batch_size })
    }
}

#[derive(Deserialize)]
struct Candidate {
    label: String,
    confidence: f64,
}

#[derive(Deserialize)]
struct FramesPayload {
    frames: Vec<Vec<Candidate>>,
}

fn best_candidate(candidates: Vec<Candidate>) -> Result<(FrameLabel, f64)> {
    let mut best: Option<(FrameLabel, f64)> = None;
    for c in candidates {
        let label: FrameLabel = c
            .label
            .parse()
            .map_err(|e: crate::framing::FramingError| ScoringError::Malformed(e.to_string()))?;
        if !(0.0..=1.0).contains(&c.confidence) {
            return Err(ScoringError::Malformed(format!("confidence {} outside [0, 1]", c.confidence)));
        }
        // Strictly greater keeps the first of equal candidates.
        if best.is_none_or(|(_, b)| c.confidence > b) {
            best = Some((label, c.confidence));
        }
    }
    best.ok_or_else(|| ScoringError::Malformed("sentence without frame candidates".into()))
}

impl FrameScorer for RemoteFrameScorer {
    fn label_sentences(&self, sentences: &[String]) -> Result<Vec<(FrameLabel, f64)>> {
        batched(sentences, self.batch_size, |chunk| {
            let value = self.client.post(&json!({ "texts": chunk }))?;
            let payload: FramesPayload =
                serde_json::from_value(value).map_err(|e| ScoringError::Malformed(e.to_string()))?;
            payload.frames.into_iter().map(best_candidate).collect()
        })
    }

    fn describe(&self) -> String {
        format!("remote-frames({})", self.client.endpoint())
    }
}
