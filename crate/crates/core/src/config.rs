//! Service and pipeline configuration from a TOML file plus environment
//! overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::framing::{AggregateOptions, AlignmentMode};
use crate::pipeline::{AnalysisOptions, Scorers};
use crate::reformulator::{GeneratorConfig, PromptOptions};
use crate::scoring::{
    build_frame_scorer, build_health_scorer, ScorerConfig, ScorerKind, ScoringError, DEFAULT_HEALTH_THRESHOLD,
};

pub const ENV_HEALTH_URL: &str = "FRAMEGUARD_HEALTH_URL";
pub const ENV_FRAME_URL: &str = "FRAMEGUARD_FRAME_URL";
pub const ENV_LLM_URL: &str = "FRAMEGUARD_LLM_URL";
pub const ENV_PORT: &str = "FRAMEGUARD_PORT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for {name}: {value}")]
    Env { name: &'static str, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub health: ScorerConfig,
    pub frames: ScorerConfig,
    /// Use the baseline scorers when a remote scorer fails.
    pub baseline_fallback: bool,
    pub health_threshold: f64,
    pub aggregate: AggregateOptions,
    pub alignment_mode: AlignmentMode,
    pub generator: GeneratorConfig,
    pub prompt: PromptOptions,
    pub analysis: AnalysisOptions,
    pub port: u16,
    pub store: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            health: ScorerConfig::default(),
            frames: ScorerConfig::default(),
            baseline_fallback: true,
            health_threshold: DEFAULT_HEALTH_THRESHOLD,
            aggregate: AggregateOptions::default(),
            alignment_mode: AlignmentMode::PrimaryOnly,
            generator: GeneratorConfig::default(),
            prompt: PromptOptions::default(),
            analysis: AnalysisOptions::default(),
            port: 8080,
            store: None,
            report: None,
            static_dir: None,
        }
    }
}

impl Config {
    pub fn from_toml_str(s: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    /// Applies overrides from `lookup`, which maps variable names to values.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(url) = lookup(ENV_HEALTH_URL) {
            self.health.kind = ScorerKind::Remote;
            self.health.endpoint = Some(url);
        }
        if let Some(url) = lookup(ENV_FRAME_URL) {
            self.frames.kind = ScorerKind::Remote;
            self.frames.endpoint = Some(url);
        }
        if let Some(url) = lookup(ENV_LLM_URL) {
            self.generator.endpoint = Some(url);
        }
        if let Some(port) = lookup(ENV_PORT) {
            self.port = port.parse().map_err(|_| ConfigError::Env {
                name: ENV_PORT,
                value: port,
            })?;
        }
        Ok(())
    }

    pub fn apply_process_env(&mut self) -> Result<(), ConfigError> {
        self.apply_env(|k| std::env::var(k).ok())
    }

    /// The configured scorers, with baseline fallbacks when enabled.
    pub fn scorers(&self) -> Result<Scorers, ScoringError> {
        let mut scorers = Scorers::new(build_health_scorer(&self.health)?, build_frame_scorer(&self.frames)?);
        if self.baseline_fallback {
            scorers = scorers.with_baseline_fallback();
        }
        scorers.health_threshold = self.health_threshold;
        scorers.aggregate = self.aggregate.clone();
        scorers.alignment_mode = self.alignment_mode;
        Ok(scorers)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = self.health.validate() {
            return invalid(format!("health scorer: {e}"));
        }
        if let Err(e) = self.frames.validate() {
            return invalid(format!("frame scorer: {e}"));
        }
        if !(0.0..=1.0).contains(&self.health_threshold) {
            return invalid(format!("health_threshold {} outside [0, 1]", self.health_threshold));
        }
        if !(0.0..=1.0).contains(&self.aggregate.secondary_threshold) || self.aggregate.top_k == 0 {
            return invalid("aggregate options out of range".into());
        }
        if self.prompt.article_limit == 0 {
            return invalid("prompt.article_limit must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = Config::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(Config::from_toml_str(&text, Path::new("x")).unwrap(), cfg);
    }

    #[test]
    fn partial_file() {
        let cfg = Config::from_toml_str("port = 9000\n[prompt]\narticle_limit = 500\n", Path::new("x")).unwrap();
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.prompt.article_limit, 500);
        assert!(cfg.prompt.schema_hint);
    }

    #[test]
    fn env_overrides() {
        let mut cfg = Config::default();
        cfg.apply_env(|k| match k {
            ENV_HEALTH_URL => Some("http://h".into()),
            ENV_LLM_URL => Some("http://l".into()),
            ENV_PORT => Some("7000".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(cfg.health.kind, ScorerKind::Remote);
        assert_eq!(cfg.frames.kind, ScorerKind::Baseline);
        assert_eq!(cfg.generator.endpoint.as_deref(), Some("http://l"));
        assert_eq!(cfg.port, 7000);
        cfg.validate().unwrap();
        assert!(cfg.apply_env(|k| (k == ENV_PORT).then(|| "x".into())).is_err());
    }
}
