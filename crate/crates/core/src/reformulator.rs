//! Moderation prompt construction, text-generation client and guidance
//! parsing with a deterministic fallback.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::framing::{AlignmentCondition, FrameAnalysis, FrameWeight};
use crate::riskengine::{RiskAssessment, RiskLevel};
use crate::scoring::remote::JsonClient;
use crate::scoring::{HealthScore, ScoringError};

/// Trigger line used when no intervention is needed.
pub const NO_TRIGGER: &str = "none (low risk, no intervention required)";
pub const TRUNCATION_MARKER: &str = " [truncated]";

pub const SYSTEM_INSTRUCTION: &str = "You are an AI comment moderator. Analyze this comment for health and frame \
transfer (reframing). Provide constructive suggestions only when the comment is unhealthy or uses a completely \
different perspective from the article.";

pub const TASK_LIST: &str = "Task:
Based on health and frame transfer analysis:
1. Confirm the risk level (low, medium, high).
2. Provide 2-3 specific, constructive reformulations that:
- Improve health if unhealthy
- Help align comment with article frames if reframing is detected
- Maintain the core message
3. Determine if the original comment should be allowed.";

pub const CLOSING: &str = "Provide a JSON response.";

const SCHEMA_HINT: &str =
    r#"Respond with an object {"risk_level": "low|medium|high", "suggestions": ["..."], "allow_post": true|false}."#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationContext {
    pub article_text: String,
    pub article_top_frames: Vec<FrameWeight>,
    pub comment_text: String,
    pub comment_frames: FrameAnalysis,
    pub alignment: AlignmentCondition,
    pub health: HealthScore,
    pub trigger: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptOptions {
    /// Maximum article length in characters before truncation.
    pub article_limit: usize,
    /// Append a one-line description of the expected JSON object.
    pub schema_hint: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self {
            article_limit: 2_000,
            schema_hint: true,
        }
    }
}

/// Cuts `text` to `limit` characters and appends the truncation marker when
/// anything was removed.
pub fn truncate_article(text: &str, limit: usize) -> String {
    match text.char_indices().nth(limit) {
        Some((cut, _)) => format!("{}{TRUNCATION_MARKER}", &text[..cut]),
        None => text.to_string(),
    }
}

fn context_block(ctx: &ModerationContext) -> String {
    let top: Vec<String> = ctx
        .article_top_frames
        .iter()
        .take(5)
        .map(|w| format!("{} ({:.2})", w.frame, w.weight))
        .collect();
    let secondaries: Vec<&str> = ctx.comment_frames.secondaries.iter().map(|f| f.name()).collect();
    format!(
        "Article top frames: {}\nComment primary frame: {}\nComment secondary frames: {}\nFrame alignment: {}\nHealth \
         score: {:.2} ({})",
        if top.is_empty() { "none".to_string() } else { top.join(", ") },
        ctx.comment_frames.primary,
        if secondaries.is_empty() { "none".to_string() } else { secondaries.join(", ") },
        ctx.alignment,
        ctx.health.score,
        if ctx.health.binary { "healthy" } else { "unhealthy" },
    )
}

pub fn build_prompt(ctx: &ModerationContext, opts: &PromptOptions) -> String {
    let trigger = if ctx.trigger.trim().is_empty() { NO_TRIGGER } else { ctx.trigger.as_str() };
    let mut prompt = format!(
        "System Instruction:\n{SYSTEM_INSTRUCTION}\n\nCONTEXT:\n{}\n\nArticle Text: {}...\n\nComment to Analyze: \
         {}\n\nTrigger: This comment requires intervention due to: {trigger}\n\n{TASK_LIST}\n\n{CLOSING}",
        context_block(ctx),
        truncate_article(&ctx.article_text, opts.article_limit),
        ctx.comment_text,
    );
    if opts.schema_hint {
        prompt.push('\n');
        prompt.push_str(SCHEMA_HINT);
    }
    prompt
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModerationGuidance {
    pub risk_level: RiskLevel,
    pub suggestions: Vec<String>,
    pub allow_post: bool,
}

impl ModerationGuidance {
    pub fn low() -> Self {
        Self {
            risk_level: RiskLevel::Low,
            suggestions: Vec::new(),
            allow_post: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GuidanceError {
    #[error("guidance is not JSON ({message})")]
    Parse { raw: String, message: String },
    #[error("guidance JSON is invalid: {message}")]
    Validation { raw: String, message: String },
}

impl GuidanceError {
    pub fn raw(&self) -> &str {
        match self {
            GuidanceError::Parse { raw, .. } | GuidanceError::Validation { raw, .. } => raw,
        }
    }
}

/// The JSON candidate inside `raw`: the body of the first code fence if
/// there is one, else the span from the first `{` to the last `}`.
fn json_candidate(raw: &str) -> &str {
    if let Some(open) = raw.find("```") {
        let after = &raw[open + 3..];
        // Skip an info string such as `json`.
        let body = after.find('\n').map_or(after, |nl| &after[nl + 1..]);
        let body = body.find("```").map_or(body, |close| &body[..close]);
        return body.trim();
    }
    match (raw.find('{'), raw.rfind('}')) {
        (Some(a), Some(b)) if a < b => &raw[a..=b],
        _ => raw.trim(),
    }
}

pub fn parse_guidance(raw: &str) -> Result<ModerationGuidance, GuidanceError> {
    let invalid = |message: String| GuidanceError::Validation {
        raw: raw.to_string(),
        message,
    };
    let value: Value = serde_json::from_str(json_candidate(raw)).map_err(|e| GuidanceError::Parse {
        raw: raw.to_string(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| invalid("expected a JSON object".into()))?;
    let field = |name: &str| obj.get(name).ok_or_else(|| invalid(format!("missing field `{name}`")));
    let risk_level: RiskLevel = field("risk_level")?
        .as_str()
        .ok_or_else(|| invalid("`risk_level` must be a string".into()))?
        .parse()
        .map_err(invalid)?;
    let suggestions = field("suggestions")?
        .as_array()
        .ok_or_else(|| invalid("`suggestions` must be an array".into()))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(|s| s.trim().to_string())
                .ok_or_else(|| invalid("`suggestions` must contain strings".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let allow_post = field("allow_post")?
        .as_bool()
        .ok_or_else(|| invalid("`allow_post` must be a boolean".into()))?;
    if risk_level != RiskLevel::Low && suggestions.iter().all(|s| s.is_empty()) {
        return Err(invalid(format!("{risk_level} risk guidance without suggestions")));
    }
    Ok(ModerationGuidance {
        risk_level,
        suggestions: suggestions.into_iter().filter(|s| !s.is_empty()).collect(),
        allow_post,
    })
}

/// A text-generation backend. Implementations must be safe to call from
/// several requests at once.
pub trait TextGenerator: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, ScoringError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_ms: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            model: "default".into(),
            temperature: 0.2,
            max_tokens: 512,
            timeout_ms: 20_000,
        }
    }
}

/// Chat-completion style HTTP client. The request carries both `prompt` and
/// a single user message; the reply text is read from `text`,
/// `choices[0].message.content`, `choices[0].text` or `response`.
#[derive(Debug, Clone)]
pub struct HttpGenerator {
    client: JsonClient,
    cfg: GeneratorConfig,
}

impl HttpGenerator {
    pub fn new(cfg: GeneratorConfig) -> Result<Self, ScoringError> {
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| ScoringError::Config("generator needs an endpoint".into()))?;
        if cfg.timeout_ms == 0 {
            return Err(ScoringError::Config("timeout_ms must be positive".into()));
        }
        Ok(Self {
            client: JsonClient::new(endpoint, Duration::from_millis(cfg.timeout_ms)),
            cfg,
        })
    }
}

/// Pulls the generated text out of the common response shapes.
pub fn extract_generated_text(v: &Value) -> Option<&str> {
    v.get("text")
        .and_then(Value::as_str)
        .or_else(|| v.pointer("/choices/0/message/content").and_then(Value::as_str))
        .or_else(|| v.pointer("/choices/0/text").and_then(Value::as_str))
        .or_else(|| v.get("response").and_then(Value::as_str))
}

impl TextGenerator for HttpGenerator {
    fn generate(&self, prompt: &str) -> Result<String, ScoringError> {
        let body = json!({
            "model": self.cfg.model,
            "prompt": prompt,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_tokens,
        });
        tracing::debug!(endpoint = self.client.endpoint(), "generation request");
        let reply = self.client.post(&body)?;
        extract_generated_text(&reply)
            .map(str::to_string)
            .ok_or_else(|| ScoringError::Malformed("no generated text in response".into()))
    }
}

/// Stands in when no generation endpoint is configured. Every call fails, so
/// moderation always returns fallback guidance.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoGenerator;

impl TextGenerator for NoGenerator {
    fn generate(&self, _prompt: &str) -> Result<String, ScoringError> {
        Err(ScoringError::Config("no generator endpoint configured".into()))
    }
}

/// An [`HttpGenerator`] when an endpoint is configured, else [`NoGenerator`].
pub fn build_generator(cfg: &GeneratorConfig) -> Result<std::sync::Arc<dyn TextGenerator>, ScoringError> {
    Ok(match cfg.endpoint {
        Some(_) => std::sync::Arc::new(HttpGenerator::new(cfg.clone())?),
        None => std::sync::Arc::new(NoGenerator),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuidanceSource {
    /// Low risk: no generation call was made.
    Skipped,
    Generated,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerationOutcome {
    pub guidance: ModerationGuidance,
    pub source: GuidanceSource,
    pub attempts: u32,
    /// True when fallback guidance replaced a failed generation.
    pub degraded: bool,
    /// Level proposed by a valid generated payload that differs from the
    /// rule engine's level.
    pub level_override: Option<RiskLevel>,
    /// The generated `allow_post` when it disagreed with the rule engine.
    pub advisory_allow_post: Option<bool>,
    pub warnings: Vec<String>,
}

pub const GENERATION_ATTEMPTS: u32 = 2;

/// Canned guidance built from the rule-engine level and the context alone.
pub fn fallback_guidance(ctx: &ModerationContext, risk: &RiskAssessment) -> ModerationGuidance {
    let mut suggestions = Vec::new();
    if !ctx.health.binary || ctx.health.score < 0.6 {
        suggestions.push(
            "Remove insults, sarcasm and sweeping generalizations, and state your disagreement as a specific, \
             respectful point."
                .to_string(),
        );
    }
    if ctx.alignment != AlignmentCondition::Match {
        let article_frame = ctx
            .article_top_frames
            .first()
            .map_or("main", |w| w.frame.name());
        suggestions.push(format!(
            "Connect your point to the article's {article_frame} framing before introducing a different angle."
        ));
    }
    suggestions.push("Keep your core message and support it with a concrete reason or example.".to_string());
    ModerationGuidance {
        risk_level: risk.level,
        suggestions,
        allow_post: risk.allow_post,
    }
}

/// Produces guidance for one comment. Low risk returns `(low, [], true)`
/// without calling `generator`; otherwise generation is attempted twice and
/// then replaced by [`fallback_guidance`]. The rule engine always decides
/// `allow_post`.
pub fn moderate(
    ctx: &ModerationContext,
    risk: &RiskAssessment,
    generator: &dyn TextGenerator,
    opts: &PromptOptions,
) -> ModerationOutcome {
    if risk.level == RiskLevel::Low {
        return ModerationOutcome {
            guidance: ModerationGuidance::low(),
            source: GuidanceSource::Skipped,
            attempts: 0,
            degraded: false,
            level_override: None,
            advisory_allow_post: None,
            warnings: Vec::new(),
        };
    }
    let prompt = build_prompt(ctx, opts);
    let mut warnings = Vec::new();
    for attempt in 1..=GENERATION_ATTEMPTS {
        let parsed = generator
            .generate(&prompt)
            .map_err(|e| format!("attempt {attempt}: generation failed: {e}"))
            .and_then(|raw| parse_guidance(&raw).map_err(|e| format!("attempt {attempt}: {e}")));
        match parsed {
            Ok(mut guidance) => {
                let level_override = (guidance.risk_level != risk.level).then_some(guidance.risk_level);
                let advisory_allow_post = (guidance.allow_post != risk.allow_post).then_some(guidance.allow_post);
                guidance.allow_post = risk.allow_post;
                return ModerationOutcome {
                    guidance,
                    source: GuidanceSource::Generated,
                    attempts: attempt,
                    degraded: false,
                    level_override,
                    advisory_allow_post,
                    warnings,
                };
            }
            Err(w) => {
                tracing::warn!("{w}");
                warnings.push(w);
            }
        }
    }
    ModerationOutcome {
        guidance: fallback_guidance(ctx, risk),
        source: GuidanceSource::Fallback,
        attempts: GENERATION_ATTEMPTS,
        degraded: true,
        level_override: None,
        advisory_allow_post: None,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_counts_characters() {
        assert_eq!(truncate_article("abc", 3), "abc");
        assert_eq!(truncate_article("abcd", 3), "abc [truncated]");
        assert_eq!(truncate_article("ééé", 2), "éé [truncated]");
    }

    #[test]
    fn candidate_extraction() {
        assert_eq!(json_candidate("```json\n{\"a\":1}\n```"), "{\"a\":1}");
        assert_eq!(json_candidate("```\n{\"a\":1}```"), "{\"a\":1}");
        assert_eq!(json_candidate("Sure! {\"a\": {\"b\": 2}} done"), "{\"a\": {\"b\": 2}}");
        assert_eq!(json_candidate("nothing"), "nothing");
    }

    #[test]
    fn parse_examples() {
        let g = parse_guidance(r#"{"risk_level":"HIGH","suggestions":["a","b"],"allow_post":false}"#).unwrap();
        assert_eq!(g.risk_level, RiskLevel::High);
        assert_eq!(g.suggestions, vec!["a", "b"]);
        assert!(matches!(parse_guidance(r#"{"risk_level":"low"}"#), Err(GuidanceError::Validation { .. })));
        assert!(matches!(parse_guidance("not json"), Err(GuidanceError::Parse { .. })));
        assert!(matches!(
            parse_guidance(r#"{"risk_level":"high","suggestions":[],"allow_post":false}"#),
            Err(GuidanceError::Validation { .. })
        ));
        assert!(matches!(
            parse_guidance(r#"{"risk_level":"severe","suggestions":["x"],"allow_post":false}"#),
            Err(GuidanceError::Validation { .. })
        ));
        assert_eq!(parse_guidance("oops").unwrap_err().raw(), "oops");
    }

    #[test]
    fn generated_text_shapes() {
        for v in [
            json!({"text": "x"}),
            json!({"choices": [{"message": {"content": "x"}}]}),
            json!({"choices": [{"text": "x"}]}),
            json!({"response": "x"}),
        ] {
            assert_eq!(extract_generated_text(&v), Some("x"));
        }
        assert_eq!(extract_generated_text(&json!({"other": 1})), None);
    }
}
