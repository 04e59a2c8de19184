//! Frame-aware comment health analysis and moderation.
//!
//! * [`corpus`]: articles, comment threads, labeled splits and rebalancing.
//! * [`scoring`]: sentence splitting and pluggable health and frame scorers.
//! * [`framing`]: frame taxonomy, document aggregation and alignment.
//! * [`riskengine`]: rule-based risk levels and moderation actions.
//! * [`reformulator`]: moderation prompts, generation and guidance parsing.
//! * [`pipeline`]: corpus analyses and single-comment moderation.
//! * [`synth`]: synthetic corpora with known ground truth.
//! * [`config`]: file and environment configuration.
//!
//! Statistical models live in the `frameguard-stats` crate, re-exported as
//! [`stats`].

pub mod config;
pub mod corpus;
pub mod framing;
pub mod pipeline;
pub mod reformulator;
pub mod riskengine;
pub mod scoring;
pub mod synth;

pub use frameguard_stats as stats;

pub use corpus::{load_corpus, load_store, rebalance, save_corpus, Corpus, Format, LabeledSplit, RebalanceOptions};
pub use framing::{classify_alignment, AlignmentCondition, FrameAnalysis, FrameLabel};
pub use pipeline::{analyze_article, analyze_corpus, moderate_comment, AnalysisReport, ModerationResult, Scorers};
pub use reformulator::{build_prompt, parse_guidance, ModerationGuidance, TextGenerator};
pub use riskengine::{assess, Action, RiskAssessment, RiskLevel};
