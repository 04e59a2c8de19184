//! HTTP API for article analysis, comment moderation, corpus search and
//! analysis reports.
//!
//! | Method | Path | Body or query |
//! |---|---|---|
//! | `POST` | `/api/articles/analyze` | `{"text": ..}` or `{"article_id": ..}` |
//! | `POST` | `/api/comments/moderate` | `{"analysis_id": .., "comment": ..}` |
//! | `GET` | `/api/topics/search` | `?q=keywords` |
//! | `GET` | `/api/reports/latest` | |
//! | `GET` | `/api/health` | |
//!
//! Errors are JSON [`ApiError`] bodies. Article analyses are kept in an
//! in-memory LRU cache keyed by content hash, so a restart forgets them and
//! clients re-submit the article. Any other path is served from the static
//! directory when one is configured.

pub mod error;
pub mod search;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use frameguard::config::{Config, ConfigError};
use frameguard::corpus::{load_store, Corpus, CorpusError, LoadOptions};
use frameguard::pipeline::{
    analyze_article, article_text, content_id, moderate_comment, ArticleAnalysis, ArticlePayload, ModerationResult,
    Scorers,
};
use frameguard::reformulator::{build_generator, NoGenerator, PromptOptions, TextGenerator};
use frameguard::scoring::ScoringError;

pub use error::{ApiError, ErrorCode};
pub use search::{ArticleSummary, SearchIndex, SEARCH_LIMIT};

/// Analyses kept for later moderation calls.
pub const CACHE_CAPACITY: usize = 1_024;

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scorer setup: {0}")]
    Scoring(#[from] ScoringError),
    #[error("corpus store: {0}")]
    Corpus(#[from] CorpusError),
}

/// Shared, read-only request state plus the synchronized analysis cache.
pub struct AppState {
    scorers: Scorers,
    generator: Arc<dyn TextGenerator>,
    prompt: PromptOptions,
    corpus: Option<Arc<Corpus>>,
    index: Option<SearchIndex>,
    report: Option<PathBuf>,
    static_dir: Option<PathBuf>,
    cache: Mutex<LruCache<String, Arc<ArticleAnalysis>>>,
}

impl AppState {
    pub fn new(scorers: Scorers, generator: Arc<dyn TextGenerator>) -> Self {
        Self {
            scorers,
            generator,
            prompt: PromptOptions::default(),
            corpus: None,
            index: None,
            report: None,
            static_dir: None,
            cache: Mutex::new(LruCache::new(NonZeroUsize::new(CACHE_CAPACITY).expect("nonzero"))),
        }
    }

    /// Baseline scorers and no generator, so moderation uses fallback
    /// guidance.
    pub fn baseline() -> Self {
        Self::new(Scorers::baseline(), Arc::new(NoGenerator))
    }

    pub fn with_prompt(mut self, prompt: PromptOptions) -> Self {
        self.prompt = prompt;
        self
    }

    pub fn with_corpus(mut self, corpus: Corpus) -> Self {
        self.index = Some(SearchIndex::new(&corpus));
        self.corpus = Some(Arc::new(corpus));
        self
    }

    pub fn with_report(mut self, path: impl Into<PathBuf>) -> Self {
        self.report = Some(path.into());
        self
    }

    pub fn with_static_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.static_dir = Some(dir.into());
        self
    }

    pub fn with_cache_capacity(self, capacity: NonZeroUsize) -> Self {
        self.cache.lock().expect("cache lock").resize(capacity);
        self
    }

    pub fn from_config(cfg: &Config) -> Result<Self, StartupError> {
        cfg.validate()?;
        let mut state = Self::new(cfg.scorers()?, build_generator(&cfg.generator)?).with_prompt(cfg.prompt.clone());
        if let Some(dir) = &cfg.store {
            state = state.with_corpus(load_store(dir, &LoadOptions::default())?);
        }
        if let Some(path) = &cfg.report {
            state = state.with_report(path);
        }
        if let Some(dir) = &cfg.static_dir {
            state = state.with_static_dir(dir);
        }
        Ok(state)
    }

    pub fn cached_analyses(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    fn cached(&self, id: &str) -> Option<Arc<ArticleAnalysis>> {
        self.cache.lock().expect("cache lock").get(id).cloned()
    }

    fn remember(&self, analysis: Arc<ArticleAnalysis>) {
        self.cache
            .lock()
            .expect("cache lock")
            .put(analysis.analysis_id.clone(), analysis);
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub article_id: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModerateRequest {
    pub analysis_id: String,
    pub comment: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SearchQuery {
    pub q: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub health_scorer: String,
    pub frame_scorer: String,
    pub cached_analyses: usize,
    pub corpus_articles: Option<usize>,
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(t)| t)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

/// Runs blocking scorer and generator calls off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn analyze(State(state): State<Shared>, payload: Result<Json<AnalyzeRequest>, JsonRejection>) -> ApiResult<ArticlePayload> {
    let req = body(payload)?;
    let text = match (req.text, req.article_id) {
        (Some(text), _) => text,
        (None, Some(id)) => {
            let corpus = state
                .corpus
                .as_ref()
                .ok_or_else(|| ApiError::not_found("no corpus store is mounted"))?;
            let a = corpus
                .article(&id)
                .ok_or_else(|| ApiError::not_found(format!("unknown article `{id}`")))?;
            article_text(&a.headline, &a.body)
        }
        (None, None) => return Err(ApiError::bad_request("expected `text` or `article_id`")),
    };
    if text.trim().is_empty() {
        return Err(ApiError::bad_request("article text is empty"));
    }
    if let Some(hit) = state.cached(&content_id(&text)) {
        return Ok(Json(hit.payload()));
    }
    let analysis = blocking({
        let state = state.clone();
        move || analyze_article(&text, &state.scorers).map_err(ApiError::from)
    })
    .await?;
    let analysis = Arc::new(analysis);
    state.remember(analysis.clone());
    Ok(Json(analysis.payload()))
}

async fn moderate(
    State(state): State<Shared>,
    payload: Result<Json<ModerateRequest>, JsonRejection>,
) -> ApiResult<ModerationResult> {
    let req = body(payload)?;
    let article = state
        .cached(&req.analysis_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown analysis id `{}`; analyze the article first", req.analysis_id)))?;
    if req.comment.trim().is_empty() {
        return Err(ApiError::bad_request("comment is empty"));
    }
    let result = blocking(move || {
        moderate_comment(&article, &req.comment, &state.scorers, state.generator.as_ref(), &state.prompt)
            .map_err(ApiError::from)
    })
    .await?;
    Ok(Json(result))
}

async fn search(State(state): State<Shared>, query: Result<Query<SearchQuery>, QueryRejection>) -> ApiResult<Vec<ArticleSummary>> {
    let Query(query) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let q = query.q.ok_or_else(|| ApiError::bad_request("missing query parameter `q`"))?;
    let index = state
        .index
        .as_ref()
        .ok_or_else(|| ApiError::not_found("no corpus store is mounted"))?;
    Ok(Json(index.search(&q, SEARCH_LIMIT)))
}

async fn latest_report(State(state): State<Shared>) -> ApiResult<serde_json::Value> {
    let path = state
        .report
        .clone()
        .ok_or_else(|| ApiError::not_found("no report path is configured"))?;
    let text = match tokio::fs::read_to_string(&path).await {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ApiError::not_found("no report has been written yet"))
        }
        Err(e) => return Err(ApiError::internal(format!("{}: {e}", path.display()))),
    };
    serde_json::from_str(&text)
        .map(Json)
        .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))
}

async fn health(State(state): State<Shared>) -> Json<HealthStatus> {
    Json(HealthStatus {
        status: "ok".into(),
        health_scorer: state.scorers.health.describe(),
        frame_scorer: state.scorers.frames.describe(),
        cached_analyses: state.cached_analyses(),
        corpus_articles: state.corpus.as_ref().map(|c| c.articles.len()),
    })
}

async fn unknown_route() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.static_dir.clone();
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/articles/analyze", post(analyze))
        .route("/api/comments/moderate", post(moderate))
        .route("/api/topics/search", get(search))
        .route("/api/reports/latest", get(latest_report))
        .route("/api", any(unknown_route))
        .route("/api/{*rest}", any(unknown_route))
        .method_not_allowed_fallback(|| async { ApiError::bad_request("method not allowed for this endpoint") })
        .with_state(Arc::new(state));
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(unknown_route),
    }
}

/// Serves `router` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
