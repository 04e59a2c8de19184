//! Sentence segmentation and pluggable health and frame scorers.
//!
//! Two implementations exist for each scorer: a deterministic lexicon
//! baseline and an HTTP client for an external model. Both are immutable
//! after construction and safe to share across threads.

pub mod lexicon;
pub mod remote;
pub mod sentences;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::framing::{aggregate, AggregateOptions, FrameAnalysis, FrameLabel, FramingError, SentenceFrame};
use lexicon::{count_phrase, tokenize, FRAME_KEYWORDS, HEALTH_LEXICON};
pub use remote::{RemoteFrameScorer, RemoteHealthScorer};
pub use sentences::split_sentences;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("request to {endpoint} timed out after {timeout_ms} ms")]
    Timeout { endpoint: String, timeout_ms: u64 },
    #[error("{endpoint} answered HTTP {status}")]
    Http { endpoint: String, status: u16 },
    #[error("could not reach {endpoint}: {message}")]
    Transport { endpoint: String, message: String },
    #[error("malformed scorer payload: {0}")]
    Malformed(String),
    #[error("scorer returned {got} results for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
    #[error("invalid scorer configuration: {0}")]
    Config(String),
    #[error("text has no sentences to score")]
    EmptyText,
    #[error(transparent)]
    Framing(#[from] FramingError),
}

impl ScoringError {
    /// Whether retrying the same request may succeed.
    pub fn retryable(&self) -> bool {
        match self {
            ScoringError::Timeout { .. } | ScoringError::Transport { .. } => true,
            ScoringError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, ScoringError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HealthScore {
    /// Probability that the comment is healthy.
    pub score: f64,
    pub binary: bool,
}

impl HealthScore {
    pub fn new(score: f64, threshold: f64) -> Self {
        Self {
            score,
            binary: score >= threshold,
        }
    }
}

pub const DEFAULT_HEALTH_THRESHOLD: f64 = 0.5;

pub trait HealthScorer: Send + Sync {
    /// One probability of health per text, in input order.
    fn score_batch(&self, texts: &[String]) -> Result<Vec<f64>>;
    fn describe(&self) -> String;
}

pub trait FrameScorer: Send + Sync {
    /// One `(label, confidence)` per sentence, in input order.
    fn label_sentences(&self, sentences: &[String]) -> Result<Vec<(FrameLabel, f64)>>;
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Baseline,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub batch_size: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            kind: ScorerKind::Baseline,
            endpoint: None,
            timeout_ms: 10_000,
            batch_size: 32,
        }
    }
}

impl ScorerConfig {
    pub fn remote(endpoint: impl Into<String>) -> Self {
        Self {
            kind: ScorerKind::Remote,
            endpoint: Some(endpoint.into()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.endpoint) {
            (ScorerKind::Remote, None) => Err(ScoringError::Config("remote scorer needs an endpoint".into())),
            (ScorerKind::Baseline, Some(_)) => Err(ScoringError::Config("baseline scorer takes no endpoint".into())),
            _ if self.batch_size == 0 => Err(ScoringError::Config("batch_size must be positive".into())),
            _ if self.timeout_ms == 0 => Err(ScoringError::Config("timeout_ms must be positive".into())),
            _ => Ok(()),
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

pub fn build_health_scorer(cfg: &ScorerConfig) -> Result<Arc<dyn HealthScorer>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ScorerKind::Baseline => Arc::new(BaselineHealthScorer::default()),
        ScorerKind::Remote => Arc::new(RemoteHealthScorer::new(cfg)?),
    })
}

pub fn build_frame_scorer(cfg: &ScorerConfig) -> Result<Arc<dyn FrameScorer>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ScorerKind::Baseline => Arc::new(BaselineFrameScorer::default()),
        ScorerKind::Remote => Arc::new(RemoteFrameScorer::new(cfg)?),
    })
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `P(healthy) = logistic(logit(prior) + Σ weight · occurrences)` over the
/// health lexicon. With no lexicon hits the score equals the prior.
#[derive(Debug, Clone)]
pub struct BaselineHealthScorer {
    pub prior: f64,
}

impl Default for BaselineHealthScorer {
    fn default() -> Self {
        // Typical healthy share of moderated news comments.
        Self { prior: 0.75 }
    }
}

impl BaselineHealthScorer {
    pub fn score(&self, text: &str) -> f64 {
        let tokens = tokenize(text);
        let evidence: f64 = HEALTH_LEXICON
            .iter()
            .map(|e| {
                let phrase: Vec<&str> = e.phrase.split(' ').collect();
                e.weight * count_phrase(&tokens, &phrase) as f64
            })
            .sum();
        logistic((self.prior / (1.0 - self.prior)).ln() + evidence)
    }
}

impl HealthScorer for BaselineHealthScorer {
    fn score_batch(&self, texts: &[String]) -> Result<Vec<f64>> {
        Ok(texts.iter().map(|t| self.score(t)).collect())
    }

    fn describe(&self) -> String {
        format!("baseline-lexicon(prior={})", self.prior)
    }
}

/// Keyword evidence per frame. With `h` hits for the best frame out of
/// `H` hits in total, confidence is `(h / H) · (1 − 0.5^h)`; a sentence with
/// no hits is `Other` at `floor`.
#[derive(Debug, Clone)]
pub struct BaselineFrameScorer {
    pub floor: f64,
}

impl Default for BaselineFrameScorer {
    fn default() -> Self {
        Self { floor: 0.3 }
    }
}

impl BaselineFrameScorer {
    pub fn label(&self, sentence: &str) -> (FrameLabel, f64) {
        let tokens = tokenize(sentence);
        let mut hits = [0usize; 10];
        for t in &tokens {
            for (i, list) in FRAME_KEYWORDS.iter().enumerate() {
                if list.contains(&t.as_str()) {
                    hits[i] += 1;
                }
            }
        }
        let total: usize = hits.iter().sum();
        if total == 0 {
            return (FrameLabel::Other, self.floor);
        }
        // First maximum in taxonomy order.
        let best = (0..10).fold(0, |b, i| if hits[i] > hits[b] { i } else { b });
        let h = hits[best] as f64;
        let confidence = (h / total as f64) * (1.0 - 0.5f64.powi(hits[best] as i32));
        (FrameLabel::ALL[best], confidence)
    }
}

impl FrameScorer for BaselineFrameScorer {
    fn label_sentences(&self, sentences: &[String]) -> Result<Vec<(FrameLabel, f64)>> {
        Ok(sentences.iter().map(|s| self.label(s)).collect())
    }

    fn describe(&self) -> String {
        format!("baseline-keywords(floor={})", self.floor)
    }
}

pub fn score_health(text: &str, scorer: &dyn HealthScorer, threshold: f64) -> Result<HealthScore> {
    let scores = scorer.score_batch(&[text.to_string()])?;
    match scores.as_slice() {
        [s] => Ok(HealthScore::new(*s, threshold)),
        other => Err(ScoringError::CountMismatch {
            expected: 1,
            got: other.len(),
        }),
    }
}

/// Splits `text` into sentences, labels each and aggregates the labels.
pub fn score_frames(text: &str, scorer: &dyn FrameScorer, opts: &AggregateOptions) -> Result<FrameAnalysis> {
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return Err(ScoringError::EmptyText);
    }
    let labels = scorer.label_sentences(&sentences)?;
    if labels.len() != sentences.len() {
        return Err(ScoringError::CountMismatch {
            expected: sentences.len(),
            got: labels.len(),
        });
    }
    let frames = sentences
        .into_iter()
        .zip(labels)
        .map(|(text, (frame, confidence))| SentenceFrame {
            text,
            frame,
            confidence,
        })
        .collect();
    Ok(aggregate(frames, opts)?)
}
