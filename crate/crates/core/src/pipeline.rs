//! End-to-end orchestration: scoring a corpus, running the health models
//! and moderating single comments against an analyzed article.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use frameguard_stats::{
    agreement, emmeans, fit_glmm_logit, fit_ols, mean_reply_health, pairwise_or, wald_type2, AgreementStats,
    ChiSqTest, CoefficientRow, DataTable, EmmResult, EmmWeights, FactorSpec, GlmmFit, GlmmOptions, ModelSpec,
    PairwiseComparison, StatsError,
};

use crate::corpus::{corpus_stats, Corpus, CorpusError, CorpusStats, Proportion};
use crate::framing::{
    classify_alignment_with, AggregateOptions, AlignmentCondition, AlignmentMode, FrameAnalysis, FrameLabel,
    FrameWeight, SentenceFrame,
};
use crate::reformulator::{moderate, GuidanceSource, ModerationContext, ModerationGuidance, PromptOptions, TextGenerator};
use crate::riskengine::{assess, trigger, Action, RiskAssessment, RiskLevel};
use crate::scoring::{
    score_frames, BaselineFrameScorer, BaselineHealthScorer, FrameScorer, HealthScore, HealthScorer, ScoringError,
    DEFAULT_HEALTH_THRESHOLD,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("empty {0}")]
    EmptyInput(&'static str),
    #[error("scoring failed: {0}")]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl PipelineError {
    /// Whether the failure came from an unavailable upstream scorer.
    pub fn upstream(&self) -> bool {
        matches!(self, PipelineError::Scoring(e) if e.retryable())
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// The scorers and thresholds used by every pipeline entry point. Optional
/// fallbacks are used when the primary scorer fails.
#[derive(Clone)]
pub struct Scorers {
    pub health: Arc<dyn HealthScorer>,
    pub frames: Arc<dyn FrameScorer>,
    pub health_fallback: Option<Arc<dyn HealthScorer>>,
    pub frame_fallback: Option<Arc<dyn FrameScorer>>,
    pub health_threshold: f64,
    pub aggregate: AggregateOptions,
    pub alignment_mode: AlignmentMode,
}

impl Default for Scorers {
    fn default() -> Self {
        Self::baseline()
    }
}

impl Scorers {
    pub fn baseline() -> Self {
        Self::new(Arc::new(BaselineHealthScorer::default()), Arc::new(BaselineFrameScorer::default()))
    }

    pub fn new(health: Arc<dyn HealthScorer>, frames: Arc<dyn FrameScorer>) -> Self {
        Self {
            health,
            frames,
            health_fallback: None,
            frame_fallback: None,
            health_threshold: DEFAULT_HEALTH_THRESHOLD,
            aggregate: AggregateOptions::default(),
            alignment_mode: AlignmentMode::PrimaryOnly,
        }
    }

    /// Falls back to the baseline scorers when the primary ones fail.
    pub fn with_baseline_fallback(mut self) -> Self {
        self.health_fallback = Some(Arc::new(BaselineHealthScorer::default()));
        self.frame_fallback = Some(Arc::new(BaselineFrameScorer::default()));
        self
    }

    /// Health probabilities and whether the fallback produced them.
    pub fn score_health(&self, texts: &[String]) -> Result<(Vec<f64>, bool)> {
        match self.health.score_batch(texts) {
            Ok(s) => Ok((s, false)),
            Err(e) => match &self.health_fallback {
                Some(fb) => {
                    tracing::warn!("health scorer failed, using fallback: {e}");
                    Ok((fb.score_batch(texts)?, true))
                }
                None => Err(e.into()),
            },
        }
    }

    pub fn score_frames(&self, text: &str) -> Result<(FrameAnalysis, bool)> {
        match score_frames(text, self.frames.as_ref(), &self.aggregate) {
            Ok(a) => Ok((a, false)),
            Err(e @ (ScoringError::EmptyText | ScoringError::Framing(_))) => Err(e.into()),
            Err(e) => match &self.frame_fallback {
                Some(fb) => {
                    tracing::warn!("frame scorer failed, using fallback: {e}");
                    Ok((score_frames(text, fb.as_ref(), &self.aggregate)?, true))
                }
                None => Err(e.into()),
            },
        }
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn content_id(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArticleAnalysis {
    pub analysis_id: String,
    pub text: String,
    pub frames: FrameAnalysis,
    pub degraded: bool,
}

/// The wire form of an article analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticlePayload {
    pub analysis_id: String,
    pub sentences: Vec<SentenceFrame>,
    pub primary: FrameLabel,
    pub secondaries: Vec<FrameLabel>,
    pub top_frames: Vec<FrameWeight>,
    pub degraded: bool,
}

impl ArticleAnalysis {
    pub fn payload(&self) -> ArticlePayload {
        ArticlePayload {
            analysis_id: self.analysis_id.clone(),
            sentences: self.frames.sentence_frames.clone(),
            primary: self.frames.primary,
            secondaries: self.frames.secondaries.clone(),
            top_frames: self.frames.top_k.clone(),
            degraded: self.degraded,
        }
    }
}

pub fn analyze_article(text: &str, scorers: &Scorers) -> Result<ArticleAnalysis> {
    if text.trim().is_empty() {
        return Err(PipelineError::EmptyInput("article text"));
    }
    let (frames, degraded) = scorers.score_frames(text)?;
    Ok(ArticleAnalysis {
        analysis_id: content_id(text),
        text: text.to_string(),
        frames,
        degraded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationResult {
    pub analysis_id: String,
    pub comment: String,
    pub health: HealthScore,
    pub frames: FrameAnalysis,
    pub alignment: AlignmentCondition,
    pub risk_level: RiskLevel,
    pub action: Action,
    pub allow_post: bool,
    pub matched_rule: String,
    pub suggestions: Vec<String>,
    pub guidance: ModerationGuidance,
    pub guidance_source: GuidanceSource,
    pub generation_attempts: u32,
    /// True when any fallback scorer or fallback guidance was used.
    pub degraded: bool,
    pub level_override: Option<RiskLevel>,
    pub advisory_allow_post: Option<bool>,
    pub warnings: Vec<String>,
}

/// Scores `comment`, aligns it with the article, assesses risk and asks
/// `generator` for guidance when the risk is not low.
pub fn moderate_comment(
    article: &ArticleAnalysis,
    comment: &str,
    scorers: &Scorers,
    generator: &dyn TextGenerator,
    prompt: &PromptOptions,
) -> Result<ModerationResult> {
    if comment.trim().is_empty() {
        return Err(PipelineError::EmptyInput("comment"));
    }
    let (scores, health_degraded) = scorers.score_health(&[comment.to_string()])?;
    let score = match scores.as_slice() {
        [s] => *s,
        other => {
            return Err(ScoringError::CountMismatch {
                expected: 1,
                got: other.len(),
            }
            .into())
        }
    };
    let health = HealthScore::new(score, scorers.health_threshold);
    let (frames, frames_degraded) = scorers.score_frames(comment)?;
    let alignment = classify_alignment_with(&frames, &article.frames, scorers.alignment_mode);
    let risk: RiskAssessment = assess(health.score, alignment);
    let ctx = ModerationContext {
        article_text: article.text.clone(),
        article_top_frames: article.frames.top_k.clone(),
        comment_text: comment.to_string(),
        comment_frames: frames.clone(),
        alignment,
        health,
        trigger: trigger(health.score, alignment, &risk),
    };
    let outcome = moderate(&ctx, &risk, generator, prompt);
    let mut warnings = outcome.warnings;
    if health_degraded {
        warnings.push("health scored by fallback scorer".into());
    }
    if frames_degraded {
        warnings.push("frames scored by fallback scorer".into());
    }
    Ok(ModerationResult {
        analysis_id: article.analysis_id.clone(),
        comment: comment.to_string(),
        health,
        frames,
        alignment,
        risk_level: risk.level,
        action: risk.action,
        allow_post: risk.allow_post,
        matched_rule: risk.matched_rule.to_string(),
        suggestions: outcome.guidance.suggestions.clone(),
        guidance: outcome.guidance,
        guidance_source: outcome.source,
        generation_attempts: outcome.attempts,
        degraded: outcome.degraded || health_degraded || frames_degraded || article.degraded,
        level_override: outcome.level_override,
        advisory_allow_post: outcome.advisory_allow_post,
        warnings,
    })
}

// ---------------------------------------------------------------------------
// Corpus scoring

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredComment {
    pub id: String,
    pub article_id: String,
    pub depth: u32,
    pub health: HealthScore,
    pub primary: FrameLabel,
    pub alignment: AlignmentCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredArticle {
    pub id: String,
    pub outlet: String,
    pub topic: String,
    pub primary: FrameLabel,
    pub secondaries: Vec<FrameLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCorpus {
    pub articles: Vec<ScoredArticle>,
    /// Comments within the depth limit, in corpus order.
    pub comments: Vec<ScoredComment>,
    pub degraded: bool,
}

const SCORING_CHUNK: usize = 256;

/// The text an article is analyzed as: headline and body separated by a
/// blank line.
pub fn article_text(headline: &str, body: &str) -> String {
    if headline.trim().is_empty() {
        body.to_string()
    } else {
        format!("{}\n\n{}", headline.trim(), body)
    }
}

/// Scores every article and every comment within the depth limit. Work is
/// spread over threads in fixed chunks, so results do not depend on the
/// thread count.
pub fn score_corpus(corpus: &Corpus, scorers: &Scorers) -> Result<ScoredCorpus> {
    let article_frames: Vec<(FrameAnalysis, bool)> = corpus
        .articles
        .par_iter()
        .map(|a| scorers.score_frames(&article_text(&a.headline, &a.body)))
        .collect::<Result<_>>()?;
    let comments: Vec<_> = corpus.comments.iter().filter(|c| corpus.within_depth(c)).collect();
    let texts: Vec<String> = comments.iter().map(|c| c.body.clone()).collect();
    let health: Vec<(Vec<f64>, bool)> = texts
        .par_chunks(SCORING_CHUNK)
        .map(|chunk| scorers.score_health(chunk))
        .collect::<Result<_>>()?;
    let comment_frames: Vec<(FrameAnalysis, bool)> =
        texts.par_iter().map(|t| scorers.score_frames(t)).collect::<Result<_>>()?;

    let mut degraded = false;
    let mut by_id = BTreeMap::new();
    let articles: Vec<ScoredArticle> = corpus
        .articles
        .iter()
        .zip(&article_frames)
        .map(|(a, (f, d))| {
            degraded |= d;
            by_id.insert(a.id.as_str(), f);
            ScoredArticle {
                id: a.id.clone(),
                outlet: a.outlet.to_string(),
                topic: a.topic.clone(),
                primary: f.primary,
                secondaries: f.secondaries.clone(),
            }
        })
        .collect();
    let scores: Vec<f64> = health
        .into_iter()
        .flat_map(|(s, d)| {
            degraded |= d;
            s
        })
        .collect();
    if scores.len() != comments.len() {
        return Err(ScoringError::CountMismatch {
            expected: comments.len(),
            got: scores.len(),
        }
        .into());
    }
    let scored = comments
        .iter()
        .zip(scores)
        .zip(comment_frames)
        .map(|((c, s), (f, d))| {
            degraded |= d;
            let article = by_id[c.article_id.as_str()];
            ScoredComment {
                id: c.id.clone(),
                article_id: c.article_id.clone(),
                depth: c.depth,
                health: HealthScore::new(s, scorers.health_threshold),
                primary: f.primary,
                alignment: classify_alignment_with(&f, article, scorers.alignment_mode),
            }
        })
        .collect();
    Ok(ScoredCorpus {
        articles,
        comments: scored,
        degraded,
    })
}

// ---------------------------------------------------------------------------
// Corpus analysis

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    /// Recorded in the report; the baseline scorers are deterministic.
    pub seed: u64,
    pub toxicity_threshold: f64,
    pub emm_weights: EmmWeights,
    pub frame_reference: String,
    pub topic_reference: String,
    pub alignment_reference: String,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            toxicity_threshold: 0.5,
            emm_weights: EmmWeights::Equal,
            frame_reference: FrameLabel::CulturalIdentity.short().into(),
            topic_reference: "Abortion".into(),
            alignment_reference: AlignmentCondition::Match.as_str().into(),
            max_iterations: 200,
            gradient_tolerance: 1e-6,
        }
    }
}

/// A report section: its result, or why it is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "result", rename_all = "lowercase")]
pub enum Section<T> {
    Ok(T),
    Failed { error: String },
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(t) => Some(t),
            _ => None,
        }
    }

    fn from_result(r: std::result::Result<T, StatsError>) -> Self {
        match r {
            Ok(t) => Section::Ok(t),
            Err(e) => Section::Failed { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub corpus_digest: String,
    pub health_scorer: String,
    pub frame_scorer: String,
    pub health_threshold: f64,
    pub toxicity_threshold: f64,
    pub aggregate: AggregateOptions,
    pub alignment_mode: AlignmentMode,
    pub emm_weights: EmmWeights,
    pub n_articles: usize,
    pub n_comments: usize,
    pub n_top_level: usize,
    pub n_dropped: usize,
    pub n_flagged_depth: usize,
    pub degraded_scoring: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmmSummary {
    pub formula: String,
    /// Reference level per factor; differs from the requested one when that
    /// level does not occur.
    pub references: BTreeMap<String, String>,
    pub n_obs: usize,
    pub n_groups: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wald: Vec<ChiSqTest>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub model: GlmmSummary,
    pub emm: EmmResult,
    pub pairwise: Vec<PairwiseComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutletModels {
    pub article_frame: Section<GlmmSummary>,
    pub frame_condition: Section<ConditionSummary>,
    pub alignment_counts: BTreeMap<String, Proportion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsSummary {
    pub formula: String,
    pub references: BTreeMap<String, String>,
    pub n_threads: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_p: f64,
    pub df_model: usize,
    pub df_resid: usize,
    pub resid_se: f64,
    pub fit_line: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub stats: AgreementStats,
    /// Unhealthy comments whose toxicity is below the threshold, as a share
    /// of all unhealthy comments.
    pub unhealthy_low_toxicity_share: f64,
    pub n_missing_toxicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: RunMetadata,
    pub topic_table: Section<CorpusStats>,
    pub outlets: BTreeMap<String, OutletModels>,
    pub reply_health: Section<OlsSummary>,
    /// Absent when no comment carries a toxicity score.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Section<AgreementSummary>>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn corpus_digest(corpus: &Corpus) -> String {
    let mut h = Sha256::new();
    for a in &corpus.articles {
        h.update(serde_json::to_vec(a).expect("articles serialize"));
        h.update(b"\n");
    }
    for c in &corpus.comments {
        h.update(serde_json::to_vec(c).expect("comments serialize"));
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A factor with its observed levels. The requested reference is used when
/// present, else the first level in sorted order.
fn factor(name: &str, values: &[String], preferred: &str, refs: &mut BTreeMap<String, String>) -> Option<FactorSpec> {
    let levels: BTreeSet<&str> = values.iter().map(String::as_str).collect();
    if levels.len() < 2 {
        return None;
    }
    let reference = if levels.contains(preferred) {
        preferred
    } else {
        levels.iter().next().copied().expect("two levels")
    };
    refs.insert(name.to_string(), reference.to_string());
    Some(FactorSpec::new(name).reference(reference))
}

fn glmm_summary(
    fit: &GlmmFit,
    spec: &ModelSpec,
    references: BTreeMap<String, String>,
) -> std::result::Result<GlmmSummary, StatsError> {
    let wald = spec
        .fixed_factors
        .iter()
        .map(|f| wald_type2(fit, &f.name))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(GlmmSummary {
        formula: formula(spec),
        references,
        n_obs: fit.n_obs,
        n_groups: fit.n_groups,
        coefficients: fit.coefficient_table(),
        sigma2: fit.sigma2,
        loglik: fit.loglik,
        aic: fit.aic(),
        bic: fit.bic(),
        converged: fit.converged,
        iterations: fit.iterations,
        wald,
        warnings: fit.warnings.clone(),
    })
}

fn formula(spec: &ModelSpec) -> String {
    let mut terms: Vec<String> = spec.fixed_factors.iter().map(|f| f.name.clone()).collect();
    terms.extend(spec.covariates.iter().cloned());
    terms.extend(spec.interactions.iter().map(|(a, b)| format!("{a}:{b}")));
    if let Some(g) = &spec.grouping {
        terms.push(format!("(1 | {g})"));
    }
    format!(
        "{} ~ {}",
        spec.response,
        if terms.is_empty() { "1".to_string() } else { terms.join(" + ") }
    )
}

struct OutletRows {
    health: Vec<f64>,
    article_frame: Vec<String>,
    frame_condition: Vec<String>,
    topic: Vec<String>,
    article_id: Vec<String>,
}

fn outlet_models(rows: &OutletRows, opts: &AnalysisOptions) -> OutletModels {
    let mut alignment_counts: BTreeMap<String, Proportion> = AlignmentCondition::ALL
        .iter()
        .map(|a| (a.as_str().to_string(), Proportion::default()))
        .collect();
    for (cond, h) in rows.frame_condition.iter().zip(&rows.health) {
        alignment_counts.entry(cond.clone()).or_default().add(*h > 0.5);
    }
    let table = DataTable::new()
        .with_numeric("health", rows.health.clone())
        .with_categorical("article_frame", rows.article_frame.clone())
        .with_categorical("frame_condition", rows.frame_condition.clone())
        .with_categorical("topic", rows.topic.clone())
        .with_categorical("article_id", rows.article_id.clone());
    let glmm_opts = GlmmOptions {
        max_iterations: opts.max_iterations,
        gradient_tolerance: opts.gradient_tolerance,
        ..GlmmOptions::default()
    };

    let model = |main: &str, main_values: &[String], preferred: &str| {
        let mut refs = BTreeMap::new();
        let Some(main_factor) = factor(main, main_values, preferred, &mut refs) else {
            return Err(format!("`{main}` has fewer than two observed levels"));
        };
        let mut spec = ModelSpec::new("health").factor(main_factor);
        if let Some(t) = factor("topic", &rows.topic, &opts.topic_reference, &mut refs) {
            spec = spec.factor(t);
        }
        Ok((spec.grouping("article_id"), refs))
    };

    let article_frame = match model("article_frame", &rows.article_frame, &opts.frame_reference) {
        Err(reason) => Section::Skipped { reason },
        Ok((spec, refs)) => Section::from_result(
            fit_glmm_logit(&spec, &table, &glmm_opts).and_then(|fit| glmm_summary(&fit, &spec, refs)),
        ),
    };
    let frame_condition = match model("frame_condition", &rows.frame_condition, &opts.alignment_reference) {
        Err(reason) => Section::Skipped { reason },
        Ok((spec, refs)) => Section::from_result(fit_glmm_logit(&spec, &table, &glmm_opts).and_then(|fit| {
            let emm = emmeans(&fit, "frame_condition", opts.emm_weights)?;
            let pairwise = pairwise_or(&emm, &fit)?;
            Ok(ConditionSummary {
                model: glmm_summary(&fit, &spec, refs)?,
                emm,
                pairwise,
            })
        })),
    };
    OutletModels {
        article_frame,
        frame_condition,
        alignment_counts,
    }
}

fn reply_health_model(corpus: &Corpus, scored: &ScoredCorpus, opts: &AnalysisOptions) -> Section<OlsSummary> {
    let by_id: BTreeMap<&str, &ScoredComment> = scored.comments.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut rows = ThreadRows::default();
    for top in scored.comments.iter().filter(|c| c.depth == 1) {
        let replies: Vec<bool> = corpus
            .replies_of(&top.id)
            .filter_map(|r| by_id.get(r.id.as_str()))
            .filter(|r| r.depth == 2)
            .map(|r| r.health.binary)
            .collect();
        let Some(thread) = mean_reply_health(&top.id, &replies) else { continue };
        rows.mrh.push(thread.mean_reply_health);
        rows.top_health.push(if top.health.binary { "Healthy" } else { "Unhealthy" }.to_string());
        rows.top_frame.push(top.primary.short().to_string());
        rows.topic.push(corpus.article(&top.article_id).expect("validated").topic.clone());
    }
    reply_health_fit(rows, opts)
}

#[derive(Default)]
struct ThreadRows {
    mrh: Vec<f64>,
    top_health: Vec<String>,
    top_frame: Vec<String>,
    topic: Vec<String>,
}

fn reply_health_fit(rows: ThreadRows, opts: &AnalysisOptions) -> Section<OlsSummary> {
    let ThreadRows {
        mrh,
        top_health,
        top_frame,
        topic,
    } = rows;
    if mrh.is_empty() {
        return Section::Skipped {
            reason: "no top-level comment has replies".into(),
        };
    }
    let mut refs = BTreeMap::new();
    let health_f = factor("top_c_health", &top_health, "Unhealthy", &mut refs);
    let frame_f = factor("top_c_frame", &top_frame, &opts.frame_reference, &mut refs);
    let topic_f = factor("topic", &topic, &opts.topic_reference, &mut refs);
    let mut spec = ModelSpec::new("mrh");
    let interact = health_f.is_some() && frame_f.is_some();
    for f in [health_f, frame_f, topic_f].into_iter().flatten() {
        spec = spec.factor(f);
    }
    if interact {
        spec = spec.interaction("top_c_health", "top_c_frame");
    }
    let n_threads = mrh.len();
    let table = DataTable::new()
        .with_numeric("mrh", mrh)
        .with_categorical("top_c_health", top_health)
        .with_categorical("top_c_frame", top_frame)
        .with_categorical("topic", topic);
    Section::from_result(fit_ols(&spec, &table).map(|fit| OlsSummary {
        formula: formula(&spec),
        references: refs,
        n_threads,
        coefficients: fit.coefficient_table(),
        r2: fit.r2,
        adj_r2: fit.adj_r2,
        f_stat: fit.f_stat,
        f_p: fit.f_p,
        df_model: fit.df_model,
        df_resid: fit.df_resid,
        resid_se: fit.resid_se,
        fit_line: fit.fit_summary(),
    }))
}

fn text_column(table: &DataTable, name: &str) -> std::result::Result<Vec<String>, StatsError> {
    let col = table.column(name)?;
    (0..table.nrows())
        .map(|i| {
            col.level_at(i)
                .ok_or_else(|| StatsError::Parse(format!("row {}: missing `{name}`", i + 1)))
        })
        .collect()
}

fn number_column(table: &DataTable, name: &str) -> std::result::Result<Vec<f64>, StatsError> {
    let col = table.column(name)?;
    (0..table.nrows())
        .map(|i| {
            col.numeric_at(i)
                .ok_or_else(|| StatsError::Parse(format!("row {}: `{name}` is not a number", i + 1)))
        })
        .collect()
}

/// Fits the article-frame and frame-condition models to a pre-scored table
/// with columns `health` (0/1), `article_frame`, `frame_condition`, `topic`
/// and `article_id`, one row per top-level comment.
pub fn health_models_from_table(
    table: &DataTable,
    opts: &AnalysisOptions,
) -> std::result::Result<OutletModels, StatsError> {
    let health = number_column(table, "health")?;
    if let Some(bad) = health.iter().find(|h| **h != 0.0 && **h != 1.0) {
        return Err(StatsError::Parse(format!("health must be 0 or 1, got {bad}")));
    }
    let rows = OutletRows {
        health,
        article_frame: text_column(table, "article_frame")?,
        frame_condition: text_column(table, "frame_condition")?,
        topic: text_column(table, "topic")?,
        article_id: text_column(table, "article_id")?,
    };
    Ok(outlet_models(&rows, opts))
}

/// Fits the mean-reply-health model to a table with columns `mrh`,
/// `top_c_health`, `top_c_frame` and `topic`, one row per thread.
pub fn reply_health_from_table(
    table: &DataTable,
    opts: &AnalysisOptions,
) -> std::result::Result<Section<OlsSummary>, StatsError> {
    let rows = ThreadRows {
        mrh: number_column(table, "mrh")?,
        top_health: text_column(table, "top_c_health")?,
        top_frame: text_column(table, "top_c_frame")?,
        topic: text_column(table, "topic")?,
    };
    Ok(reply_health_fit(rows, opts))
}

fn agreement_section(corpus: &Corpus, scored: &ScoredCorpus, opts: &AnalysisOptions) -> Option<Section<AgreementSummary>> {
    let toxicity: BTreeMap<&str, f64> = corpus
        .comments
        .iter()
        .filter_map(|c| c.toxicity.map(|t| (c.id.as_str(), t)))
        .collect();
    if toxicity.is_empty() {
        return None;
    }
    let (mut healthy, mut non_toxic, mut health_scores, mut tox_scores) = (vec![], vec![], vec![], vec![]);
    let mut missing = 0;
    for c in &scored.comments {
        match toxicity.get(c.id.as_str()) {
            Some(&t) => {
                healthy.push(c.health.binary);
                non_toxic.push(t < opts.toxicity_threshold);
                health_scores.push(c.health.score);
                tox_scores.push(t);
            }
            None => missing += 1,
        }
    }
    let unhealthy = healthy.iter().filter(|h| !**h).count();
    let unhealthy_low_tox = healthy.iter().zip(&non_toxic).filter(|(h, n)| !**h && **n).count();
    Some(Section::from_result(agreement(&healthy, &non_toxic, &health_scores, &tox_scores).map(
        |stats| AgreementSummary {
            stats,
            unhealthy_low_toxicity_share: if unhealthy == 0 {
                f64::NAN
            } else {
                unhealthy_low_tox as f64 / unhealthy as f64
            },
            n_missing_toxicity: missing,
        },
    )))
}

/// Scores the corpus and runs every analysis. A failing analysis is marked
/// in its section and the others still run.
pub fn analyze_corpus(corpus: &Corpus, scorers: &Scorers, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let scored = score_corpus(corpus, scorers)?;
    Ok(analyze_scored(corpus, &scored, scorers, opts))
}

pub fn analyze_scored(corpus: &Corpus, scored: &ScoredCorpus, scorers: &Scorers, opts: &AnalysisOptions) -> AnalysisReport {
    let articles: BTreeMap<&str, &ScoredArticle> = scored.articles.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut per_outlet: BTreeMap<String, OutletRows> = BTreeMap::new();
    for c in scored.comments.iter().filter(|c| c.depth == 1) {
        let a = articles[c.article_id.as_str()];
        let rows = per_outlet.entry(a.outlet.clone()).or_insert_with(|| OutletRows {
            health: vec![],
            article_frame: vec![],
            frame_condition: vec![],
            topic: vec![],
            article_id: vec![],
        });
        rows.health.push(f64::from(u8::from(c.health.binary)));
        rows.article_frame.push(a.primary.short().to_string());
        rows.frame_condition.push(c.alignment.as_str().to_string());
        rows.topic.push(a.topic.clone());
        rows.article_id.push(a.id.clone());
    }
    let outlets = per_outlet
        .iter()
        .map(|(outlet, rows)| (outlet.clone(), outlet_models(rows, opts)))
        .collect();

    let health: std::collections::HashMap<String, bool> =
        scored.comments.iter().map(|c| (c.id.clone(), c.health.binary)).collect();
    let within: Vec<_> = corpus.comments.iter().filter(|c| health.contains_key(&c.id)).cloned().collect();
    let view = Corpus::from_records(corpus.articles.clone(), within, &crate::corpus::LoadOptions {
        max_depth: corpus.max_depth,
    });
    let topic_table = match corpus_stats(&view, &health) {
        Ok(s) => Section::Ok(s),
        Err(e) => Section::Failed { error: e.to_string() },
    };

    AnalysisReport {
        metadata: RunMetadata {
            seed: opts.seed,
            corpus_digest: corpus_digest(corpus),
            health_scorer: scorers.health.describe(),
            frame_scorer: scorers.frames.describe(),
            health_threshold: scorers.health_threshold,
            toxicity_threshold: opts.toxicity_threshold,
            aggregate: scorers.aggregate.clone(),
            alignment_mode: scorers.alignment_mode,
            emm_weights: opts.emm_weights,
            n_articles: corpus.articles.len(),
            n_comments: scored.comments.len(),
            n_top_level: scored.comments.iter().filter(|c| c.depth == 1).count(),
            n_dropped: corpus.dropped(),
            n_flagged_depth: corpus.flagged.len(),
            degraded_scoring: scored.degraded,
        },
        topic_table,
        outlets,
        reply_health: reply_health_model(corpus, scored, opts),
        agreement: agreement_section(corpus, scored, opts),
    }
}

// ---------------------------------------------------------------------------
// Text rendering

fn render_coefficients(out: &mut String, rows: &[CoefficientRow], stat: &str) {
    use std::fmt::Write;
    let _ = writeln!(out, "  {:<34} {:>9} {:>8} {:>8} {:>9}", "Predictor", "Estimate", "SE", stat, "p");
    for r in rows {
        let _ = writeln!(
            out,
            "  {:<34} {:>9.3} {:>8.3} {:>8.2} {:>9.4} {}",
            r.predictor,
            r.estimate,
            r.se,
            r.statistic,
            r.p,
            frameguard_stats::format::stars(r.p)
        );
    }
}

fn render_section<T>(out: &mut String, title: &str, s: &Section<T>, body: impl FnOnce(&mut String, &T)) {
    use std::fmt::Write;
    let _ = writeln!(out, "\n{title}");
    match s {
        Section::Ok(t) => body(out, t),
        Section::Failed { error } => {
            let _ = writeln!(out, "  failed: {error}");
        }
        Section::Skipped { reason } => {
            let _ = writeln!(out, "  skipped: {reason}");
        }
    }
}

fn render_glmm(out: &mut String, m: &GlmmSummary) {
    use std::fmt::Write;
    let _ = writeln!(out, "  {}", m.formula);
    let _ = writeln!(
        out,
        "  n = {}, groups = {}, sigma^2 = {:.4}, logLik = {:.2}, AIC = {:.2}",
        frameguard_stats::format::thousands(m.n_obs as u64),
        m.n_groups,
        m.sigma2,
        m.loglik,
        m.aic
    );
    render_coefficients(out, &m.coefficients, "z");
    for w in &m.wald {
        let _ = writeln!(
            out,
            "  Wald chi2({}) for {} = {:.2}, {}",
            w.df,
            w.term,
            w.statistic,
            frameguard_stats::format::p_clause(w.p)
        );
    }
}

/// Plain-text tables for terminals and diffs.
pub fn render_text(report: &AnalysisReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let m = &report.metadata;
    let _ = writeln!(
        out,
        "Corpus {}: {} articles, {} comments ({} top-level), seed {}",
        &m.corpus_digest[..12],
        m.n_articles,
        m.n_comments,
        m.n_top_level,
        m.seed
    );
    let _ = writeln!(out, "Scorers: {} / {}", m.health_scorer, m.frame_scorer);
    render_section(&mut out, "Healthy share by topic", &report.topic_table, |out, s| {
        let _ = writeln!(out, "  {:<28} {:>8} {:>8}", "Topic", "n", "healthy");
        for (topic, p) in &s.by_topic {
            let _ = writeln!(out, "  {:<28} {:>8} {:>8.3}", topic, p.total, p.proportion);
        }
        let _ = writeln!(out, "  {:<28} {:>8} {:>8.3}", "All", s.overall.total, s.overall.proportion);
    });
    for (outlet, models) in &report.outlets {
        render_section(&mut out, &format!("[{outlet}] Article frame model"), &models.article_frame, render_glmm);
        render_section(&mut out, &format!("[{outlet}] Frame condition model"), &models.frame_condition, |out, c| {
            render_glmm(out, &c.model);
            let _ = writeln!(out, "  EMMs (probability healthy):");
            for l in &c.emm.levels {
                let _ = writeln!(
                    out,
                    "    {:<10} {:.3} [{:.3}, {:.3}]",
                    l.level, l.response, l.lower, l.upper
                );
            }
            let _ = writeln!(out, "  Pairwise odds ratios (Tukey):");
            for p in &c.pairwise {
                let _ = writeln!(
                    out,
                    "    {} / {}: OR = {:.3}, {}",
                    p.pair.0,
                    p.pair.1,
                    p.odds_ratio,
                    frameguard_stats::format::p_clause(p.p_adjusted)
                );
            }
        });
    }
    render_section(&mut out, "Mean reply health model", &report.reply_health, |out, o| {
        let _ = writeln!(out, "  {}", o.formula);
        let _ = writeln!(out, "  threads = {}", frameguard_stats::format::thousands(o.n_threads as u64));
        render_coefficients(out, &o.coefficients, "t");
        let _ = writeln!(out, "  {}", o.fit_line);
    });
    if let Some(a) = &report.agreement {
        render_section(&mut out, "Health vs toxicity agreement", a, |out, a| {
            let _ = writeln!(
                out,
                "  n = {}, kappa = {:.3}, rho = {:.3}, unhealthy with low toxicity = {:.1}%",
                a.stats.n,
                a.stats.kappa,
                a.stats.spearman_rho,
                100.0 * a.unhealthy_low_toxicity_share
            );
        });
    }
    out
}
