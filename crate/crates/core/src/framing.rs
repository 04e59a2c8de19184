//! Frame taxonomy, document-level frame aggregation and alignment between a
//! comment and the article it responds to.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FramingError {
    #[error("no sentence frames to aggregate")]
    Empty,
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("unknown frame label `{0}`")]
    UnknownLabel(String),
}

/// The nine generic frames plus `Other`, in taxonomy order. The derived
/// ordering is the tie-break order used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameLabel {
    Economic,
    Morality,
    FairnessEquality,
    LegalityCrime,
    PoliticalPolicies,
    SecurityDefense,
    HealthSafety,
    CulturalIdentity,
    PublicOpinion,
    Other,
}

impl FrameLabel {
    pub const ALL: [FrameLabel; 10] = [
        FrameLabel::Economic,
        FrameLabel::Morality,
        FrameLabel::FairnessEquality,
        FrameLabel::LegalityCrime,
        FrameLabel::PoliticalPolicies,
        FrameLabel::SecurityDefense,
        FrameLabel::HealthSafety,
        FrameLabel::CulturalIdentity,
        FrameLabel::PublicOpinion,
        FrameLabel::Other,
    ];

    /// Canonical display name.
    pub fn name(self) -> &'static str {
        match self {
            FrameLabel::Economic => "Economic",
            FrameLabel::Morality => "Morality",
            FrameLabel::FairnessEquality => "Fairness and Equality",
            FrameLabel::LegalityCrime => "Legality and Crime",
            FrameLabel::PoliticalPolicies => "Political and Policies",
            FrameLabel::SecurityDefense => "Security and Defense",
            FrameLabel::HealthSafety => "Health and Safety",
            FrameLabel::CulturalIdentity => "Cultural Identity",
            FrameLabel::PublicOpinion => "Public Opinion",
            FrameLabel::Other => "Other",
        }
    }

    /// One-word name used for factor levels in model tables.
    pub fn short(self) -> &'static str {
        match self {
            FrameLabel::Economic => "Economic",
            FrameLabel::Morality => "Morality",
            FrameLabel::FairnessEquality => "Fairness",
            FrameLabel::LegalityCrime => "Legality",
            FrameLabel::PoliticalPolicies => "Political",
            FrameLabel::SecurityDefense => "Security",
            FrameLabel::HealthSafety => "Health",
            FrameLabel::CulturalIdentity => "Cultural",
            FrameLabel::PublicOpinion => "Opinion",
            FrameLabel::Other => "Other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FrameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for FrameLabel {
    type Err = FramingError;

    /// Case-insensitive; accepts the full name, the one-word name, and the
    /// name with `and` or punctuation removed (`FairnessEquality`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = squash(s);
        FrameLabel::ALL
            .into_iter()
            .find(|l| {
                let full = squash(l.name());
                key == full || key == squash(l.short()) || key == full.replace("and", "")
            })
            .ok_or_else(|| FramingError::UnknownLabel(s.to_string()))
    }
}

impl Serialize for FrameLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FrameLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a comment's frame relates to the article's frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlignmentCondition {
    Match,
    Selective,
    Complete,
}

impl AlignmentCondition {
    pub const ALL: [AlignmentCondition; 3] = [
        AlignmentCondition::Match,
        AlignmentCondition::Selective,
        AlignmentCondition::Complete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentCondition::Match => "Match",
            AlignmentCondition::Selective => "Selective",
            AlignmentCondition::Complete => "Complete",
        }
    }
}

impl fmt::Display for AlignmentCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlignmentCondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AlignmentCondition::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown alignment condition `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFrame {
    pub text: String,
    pub frame: FrameLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameWeight {
    pub frame: FrameLabel,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameAnalysis {
    pub sentence_frames: Vec<SentenceFrame>,
    pub primary: FrameLabel,
    /// Labels other than the primary at or above the secondary threshold,
    /// by descending weight.
    pub secondaries: Vec<FrameLabel>,
    /// Every represented label by descending weight; sums to 1.
    pub weights: Vec<FrameWeight>,
    pub top_k: Vec<FrameWeight>,
}

impl FrameAnalysis {
    pub fn weight(&self, label: FrameLabel) -> f64 {
        self.weights
            .iter()
            .find(|w| w.frame == label)
            .map_or(0.0, |w| w.weight)
    }

    /// Primary followed by the secondaries.
    pub fn labels(&self) -> impl Iterator<Item = FrameLabel> + '_ {
        std::iter::once(self.primary).chain(self.secondaries.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregateOptions {
    pub secondary_threshold: f64,
    pub top_k: usize,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            secondary_threshold: 0.10,
            top_k: 5,
        }
    }
}

/// Weights closer than this relative amount are treated as tied, so that
/// rescaling every confidence cannot reorder labels through rounding.
const TIE_RESOLUTION: f64 = 1e-9;

fn weight_key(w: f64) -> i64 {
    (w / TIE_RESOLUTION).round() as i64
}

/// Aggregates sentence labels into a document-level analysis.
///
/// A label's weight is its share of the total confidence; when every
/// confidence is zero each sentence counts once. The primary is the
/// heaviest label with ties broken by taxonomy order.
pub fn aggregate(sentences: Vec<SentenceFrame>, opts: &AggregateOptions) -> Result<FrameAnalysis, FramingError> {
    if sentences.is_empty() {
        return Err(FramingError::Empty);
    }
    if let Some(bad) = sentences.iter().find(|s| !(0.0..=1.0).contains(&s.confidence)) {
        return Err(FramingError::InvalidConfidence(bad.confidence));
    }
    let mut mass = [0.0f64; 10];
    let mut present = [false; 10];
    let total: f64 = sentences.iter().map(|s| s.confidence).sum();
    for s in &sentences {
        let i = s.frame.index();
        present[i] = true;
        mass[i] += if total > 0.0 { s.confidence } else { 1.0 };
    }
    let denom = if total > 0.0 { total } else { sentences.len() as f64 };

    let mut weights: Vec<FrameWeight> = FrameLabel::ALL
        .into_iter()
        .filter(|l| present[l.index()])
        .map(|l| FrameWeight {
            frame: l,
            weight: mass[l.index()] / denom,
        })
        .collect();
    // Stable sort keeps taxonomy order within tied weights.
    weights.sort_by_key(|w| std::cmp::Reverse(weight_key(w.weight)));

    let primary = weights[0].frame;
    let secondaries = weights[1..]
        .iter()
        .filter(|w| w.weight >= opts.secondary_threshold - TIE_RESOLUTION)
        .map(|w| w.frame)
        .collect();
    let top_k = weights.iter().take(opts.top_k).copied().collect();
    Ok(FrameAnalysis {
        sentence_frames: sentences,
        primary,
        secondaries,
        weights,
        top_k,
    })
}

/// [`aggregate`] over bare `(label, confidence)` pairs.
pub fn aggregate_frames(pairs: &[(FrameLabel, f64)], opts: &AggregateOptions) -> Result<FrameAnalysis, FramingError> {
    aggregate(
        pairs
            .iter()
            .map(|&(frame, confidence)| SentenceFrame {
                text: String::new(),
                frame,
                confidence,
            })
            .collect(),
        opts,
    )
}

/// Which comment frames take part in alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    /// Only the comment's primary frame (the default).
    #[default]
    PrimaryOnly,
    /// Any of the comment's primary or secondary frames. Match when the
    /// article's primary is among them, Selective when any is an article
    /// secondary.
    AnyCommentFrame,
}

pub fn classify_alignment(comment_primary: FrameLabel, article: &FrameAnalysis) -> AlignmentCondition {
    if comment_primary == article.primary {
        AlignmentCondition::Match
    } else if article.secondaries.contains(&comment_primary) {
        AlignmentCondition::Selective
    } else {
        AlignmentCondition::Complete
    }
}

pub fn classify_alignment_with(
    comment: &FrameAnalysis,
    article: &FrameAnalysis,
    mode: AlignmentMode,
) -> AlignmentCondition {
    match mode {
        AlignmentMode::PrimaryOnly => classify_alignment(comment.primary, article),
        AlignmentMode::AnyCommentFrame => {
            if comment.labels().any(|l| l == article.primary) {
                AlignmentCondition::Match
            } else if comment.labels().any(|l| article.secondaries.contains(&l)) {
                AlignmentCondition::Selective
            } else {
                AlignmentCondition::Complete
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FrameLabel::*;

    #[test]
    fn names_round_trip() {
        for l in FrameLabel::ALL {
            assert_eq!(l.name().parse::<FrameLabel>().unwrap(), l);
            assert_eq!(l.short().parse::<FrameLabel>().unwrap(), l);
            assert_eq!(l.name().to_uppercase().parse::<FrameLabel>().unwrap(), l);
            let json = serde_json::to_string(&l).unwrap();
            assert_eq!(serde_json::from_str::<FrameLabel>(&json).unwrap(), l);
        }
        assert_eq!("FairnessEquality".parse::<FrameLabel>().unwrap(), FairnessEquality);
        assert_eq!("legality and crime".parse::<FrameLabel>().unwrap(), LegalityCrime);
        assert!("Sports".parse::<FrameLabel>().is_err());
        assert_eq!(serde_json::to_string(&HealthSafety).unwrap(), "\"Health and Safety\"");
    }

    #[test]
    fn single_label() {
        let a = aggregate_frames(&[(Economic, 0.9)], &AggregateOptions::default()).unwrap();
        assert_eq!(a.primary, Economic);
        assert!(a.secondaries.is_empty());
        assert_eq!(a.weights[0].weight, 1.0);
    }

    #[test]
    fn symmetric_tie_uses_taxonomy_order() {
        let a = aggregate_frames(&[(Morality, 0.5), (Economic, 0.5)], &AggregateOptions::default()).unwrap();
        assert_eq!(a.primary, Economic);
        assert_eq!(a.secondaries, vec![Morality]);
    }

    #[test]
    fn threshold_excludes_light_labels() {
        let a = aggregate_frames(
            &[(Economic, 0.9), (Economic, 0.9), (Economic, 0.9), (Economic, 0.9), (Other, 0.3)],
            &AggregateOptions::default(),
        )
        .unwrap();
        assert!((a.weight(Other) - 0.3 / 3.9).abs() < 1e-15);
        assert!(a.secondaries.is_empty());
        assert_eq!(a.top_k.len(), 2);
    }

    #[test]
    fn zero_confidence_falls_back_to_counts() {
        let a = aggregate_frames(&[(Morality, 0.0), (Economic, 0.0), (Morality, 0.0)], &AggregateOptions::default())
            .unwrap();
        assert_eq!(a.primary, Morality);
        assert!((a.weight(Economic) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_out_of_range() {
        assert_eq!(aggregate_frames(&[], &AggregateOptions::default()), Err(FramingError::Empty));
        assert!(matches!(
            aggregate_frames(&[(Economic, 1.5)], &AggregateOptions::default()),
            Err(FramingError::InvalidConfidence(_))
        ));
    }

    #[test]
    fn any_frame_mode() {
        let article = aggregate_frames(&[(Economic, 0.9), (Morality, 0.4)], &AggregateOptions::default()).unwrap();
        let comment = aggregate_frames(&[(HealthSafety, 0.8), (Economic, 0.3)], &AggregateOptions::default()).unwrap();
        assert_eq!(classify_alignment(comment.primary, &article), AlignmentCondition::Complete);
        assert_eq!(
            classify_alignment_with(&comment, &article, AlignmentMode::AnyCommentFrame),
            AlignmentCondition::Match
        );
    }
}
