//! Rule-based risk stratification from comment health and frame alignment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::framing::AlignmentCondition;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    #[error("health {0} is not a probability")]
    InvalidHealth(f64),
    #[error("no rule matches health {health} with {alignment} alignment")]
    NoMatch { health: f64, alignment: AlignmentCondition },
    #[error("invalid rule {id}: {message}")]
    InvalidRule { id: String, message: String },
    #[error("rule file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLevel {
    Low,
    Medium,
    High,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Medium, RiskLevel::High];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Medium => "medium",
            RiskLevel::High => "high",
        }
    }

    /// The action every rule at this level must take.
    pub fn action(self) -> Action {
        match self {
            RiskLevel::Low => Action::Allow,
            RiskLevel::Medium => Action::Suggest,
            RiskLevel::High => Action::SuggestAndFlag,
        }
    }

    /// Only high risk blocks the post.
    pub fn allows_post(self) -> bool {
        self != RiskLevel::High
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RiskLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RiskLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown risk level `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Allow,
    Suggest,
    SuggestAndFlag,
}

/// Alignment conditions a rule applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlignmentSet {
    /// The string `"any"`.
    Any(AnyTag),
    Only(Vec<AlignmentCondition>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnyTag {
    Any,
}

impl AlignmentSet {
    pub fn any() -> Self {
        AlignmentSet::Any(AnyTag::Any)
    }

    pub fn contains(&self, a: AlignmentCondition) -> bool {
        match self {
            AlignmentSet::Any(_) => true,
            AlignmentSet::Only(v) => v.contains(&a),
        }
    }
}

/// One row of the rule table. The health interval is half-open:
/// `min_health <= health < max_health`, with either bound optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_health: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_health: Option<f64>,
    pub alignment: AlignmentSet,
    pub level: RiskLevel,
    pub action: Action,
}

impl Rule {
    pub fn matches(&self, health: f64, alignment: AlignmentCondition) -> bool {
        self.min_health.is_none_or(|lo| health >= lo)
            && self.max_health.is_none_or(|hi| health < hi)
            && self.alignment.contains(alignment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RiskAssessment {
    pub level: RiskLevel,
    pub action: Action,
    pub allow_post: bool,
    pub matched_rule: &'static str,
}

/// Outcome of a user-supplied rule set, which owns its rule ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub level: RiskLevel,
    pub action: Action,
    pub allow_post: bool,
    pub matched_rule: String,
}

/// An ordered rule table evaluated top-down; the first match wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

fn rule(
    id: &str,
    min_health: Option<f64>,
    max_health: Option<f64>,
    alignment: AlignmentSet,
    level: RiskLevel,
) -> Rule {
    Rule {
        id: id.into(),
        min_health,
        max_health,
        alignment,
        level,
        action: level.action(),
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        use AlignmentCondition::*;
        use RiskLevel::*;
        Self {
            rules: vec![
                rule("R1", None, Some(0.3), AlignmentSet::any(), High),
                rule("R2", None, Some(0.5), AlignmentSet::Only(vec![Complete]), High),
                rule("R3", Some(0.3), Some(0.6), AlignmentSet::any(), Medium),
                rule("R4", Some(0.6), None, AlignmentSet::Only(vec![Selective, Complete]), Medium),
                rule("R5", Some(0.6), None, AlignmentSet::Only(vec![Match]), Low),
            ],
        }
    }
}

impl RuleSet {
    /// Checks ids are unique, bounds are ordered probabilities and every
    /// rule's action agrees with its level.
    pub fn validate(&self) -> Result<(), RiskError> {
        let mut seen = std::collections::HashSet::new();
        for r in &self.rules {
            let bad = |message: String| RiskError::InvalidRule {
                id: r.id.clone(),
                message,
            };
            if !seen.insert(r.id.as_str()) {
                return Err(bad("duplicate id".into()));
            }
            for b in [r.min_health, r.max_health].into_iter().flatten() {
                if !(0.0..=1.0).contains(&b) {
                    return Err(bad(format!("bound {b} outside [0, 1]")));
                }
            }
            if let (Some(lo), Some(hi)) = (r.min_health, r.max_health) {
                if lo >= hi {
                    return Err(bad(format!("empty interval [{lo}, {hi})")));
                }
            }
            if r.action != r.level.action() {
                return Err(bad(format!("{:?} is not the action for {} risk", r.action, r.level)));
            }
            if matches!(&r.alignment, AlignmentSet::Only(v) if v.is_empty()) {
                return Err(bad("empty alignment set".into()));
            }
        }
        Ok(())
    }

    pub fn assess(&self, health: f64, alignment: AlignmentCondition) -> Result<RuleOutcome, RiskError> {
        if !(0.0..=1.0).contains(&health) {
            return Err(RiskError::InvalidHealth(health));
        }
        let r = self
            .rules
            .iter()
            .find(|r| r.matches(health, alignment))
            .ok_or(RiskError::NoMatch { health, alignment })?;
        Ok(RuleOutcome {
            level: r.level,
            action: r.action,
            allow_post: r.level.allows_post(),
            matched_rule: r.id.clone(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("rule sets always serialize")
    }

    pub fn from_toml(s: &str) -> Result<Self, RiskError> {
        let set: RuleSet = toml::from_str(s).map_err(|e| RiskError::Parse(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }
}

/// Assesses with the default rule table. Health is clamped to `[0, 1]` and
/// NaN counts as 0, so the function is total.
pub fn assess(health: f64, alignment: AlignmentCondition) -> RiskAssessment {
    use AlignmentCondition::*;
    let h = if health.is_nan() { 0.0 } else { health.clamp(0.0, 1.0) };
    let (level, id) = if h < 0.3 {
        (RiskLevel::High, "R1")
    } else if h < 0.5 && alignment == Complete {
        (RiskLevel::High, "R2")
    } else if h < 0.6 {
        (RiskLevel::Medium, "R3")
    } else if alignment == Match {
        (RiskLevel::Low, "R5")
    } else {
        (RiskLevel::Medium, "R4")
    };
    RiskAssessment {
        level,
        action: level.action(),
        allow_post: level.allows_post(),
        matched_rule: id,
    }
}

/// Reason string for the prompt's trigger line.
pub fn trigger(health: f64, alignment: AlignmentCondition, risk: &RiskAssessment) -> String {
    let mut reasons = Vec::new();
    if health < 0.5 {
        reasons.push(format!("low health score ({health:.2})"));
    } else if health < 0.6 {
        reasons.push(format!("borderline health score ({health:.2})"));
    }
    match alignment {
        AlignmentCondition::Complete => reasons.push("complete reframing relative to the article".into()),
        AlignmentCondition::Selective => reasons.push("selective reframing toward a secondary article frame".into()),
        AlignmentCondition::Match => {}
    }
    if risk.level == RiskLevel::Low || reasons.is_empty() {
        return crate::reformulator::NO_TRIGGER.to_string();
    }
    format!("{} risk: {}", risk.level, reasons.join("; "))
}
