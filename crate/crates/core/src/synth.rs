//! Seeded synthetic corpora whose health, frames and alignment are known
//! by construction and recovered exactly by the baseline scorers.
//!
//! Every article has one primary and one secondary frame. Each comment is
//! one sentence with two keywords of the frame dictated by its alignment
//! condition, plus a constructive cue when healthy or two hostile phrases
//! when unhealthy. Health counts per condition are exact quotas, not
//! Bernoulli draws.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Comment, Corpus, LabeledRecord, LabeledSplit, LoadOptions, Outlet, SplitName};
use crate::framing::{AlignmentCondition, FrameLabel};
use crate::scoring::lexicon::FRAME_KEYWORDS;

pub const TOPICS: [&str; 11] = [
    "Abortion",
    "Climate Change",
    "Criminal Justice",
    "Education",
    "Elections",
    "Foreign Policy",
    "Gun Control",
    "Healthcare",
    "Immigration",
    "Technology",
    "Trade",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    pub seed: u64,
    pub n_articles: usize,
    /// Top-level comments.
    pub n_comments: usize,
    pub outlets: Vec<Outlet>,
    /// Healthy share for Match, Selective and Complete comments.
    pub health_rates: [f64; 3],
    /// Direct replies per top-level comment.
    pub replies_per_comment: usize,
    /// Probability a reply is healthy given an unhealthy or healthy parent.
    pub reply_health: (f64, f64),
    pub toxicity: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_articles: 200,
            n_comments: 2_000,
            outlets: vec![Outlet::Nyt, Outlet::Socc],
            health_rates: [0.83, 0.81, 0.78],
            replies_per_comment: 0,
            reply_health: (0.6, 0.8),
            toxicity: false,
        }
    }
}

/// Ground truth for one generated top-level comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedComment {
    pub id: String,
    pub condition: AlignmentCondition,
    pub frame: FrameLabel,
    pub healthy: bool,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub planted: Vec<PlantedComment>,
    /// Article id to (primary, secondary).
    pub article_frames: Vec<(String, FrameLabel, FrameLabel)>,
}

/// Frames with keywords, in taxonomy order.
fn framed() -> &'static [FrameLabel] {
    &FrameLabel::ALL[..9]
}

fn keywords(frame: FrameLabel) -> &'static [&'static str] {
    FRAME_KEYWORDS[frame.index()]
}

fn pair(rng: &mut ChaCha8Rng, frame: FrameLabel) -> (&'static str, &'static str) {
    let k = keywords(frame);
    let i = rng.random_range(0..k.len());
    let mut j = rng.random_range(0..k.len() - 1);
    if j >= i {
        j += 1;
    }
    (k[i], k[j])
}

/// A neutral sentence carrying exactly two keywords of `frame`.
pub fn frame_sentence(rng: &mut ChaCha8Rng, frame: FrameLabel) -> String {
    const TEMPLATES: [&str; 4] = [
        "The {a} and {b} question came up again this week.",
        "Officials described the {a} and the {b} in detail.",
        "Both {a} and {b} shaped the discussion.",
        "Readers asked how {a} relates to {b}.",
    ];
    let (a, b) = pair(rng, frame);
    TEMPLATES[rng.random_range(0..TEMPLATES.len())]
        .replace("{a}", a)
        .replace("{b}", b)
}

pub fn comment_text(rng: &mut ChaCha8Rng, frame: FrameLabel, healthy: bool) -> String {
    let (a, b) = pair(rng, frame);
    if healthy {
        const T: [&str; 3] = [
            "I think the {a} and {b} point deserves a careful look.",
            "In my experience {a} and {b} matter more than people admit.",
            "I think {a} and {b} should be weighed together.",
        ];
        T[rng.random_range(0..T.len())].replace("{a}", a).replace("{b}", b)
    } else {
        const T: [&str; 3] = [
            "Only idiots talk about {a} and {b}, so shut up.",
            "You people and your {a} and {b} nonsense are pathetic.",
            "Typical morons blaming {a} and {b} again, get over it.",
        ];
        T[rng.random_range(0..T.len())].replace("{a}", a).replace("{b}", b)
    }
}

fn quota(n: usize, rate: f64) -> usize {
    (rate * n as f64).round() as usize
}

/// Generates a corpus under `opts`. Identical options give identical output.
pub fn generate(opts: &SynthOptions) -> SynthCorpus {
    assert!(opts.n_articles > 0 && !opts.outlets.is_empty(), "need articles and outlets");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let frames = framed();

    let mut articles = Vec::with_capacity(opts.n_articles);
    let mut article_frames = Vec::with_capacity(opts.n_articles);
    for i in 0..opts.n_articles {
        let primary = frames[i % frames.len()];
        let secondary = frames[(i / frames.len() + 1 + primary.index()) % frames.len()];
        let secondary = if secondary == primary {
            frames[(primary.index() + 1) % frames.len()]
        } else {
            secondary
        };
        let id = format!("a{:04}", i + 1);
        let headline = frame_sentence(&mut rng, primary);
        let body = [
            frame_sentence(&mut rng, primary),
            frame_sentence(&mut rng, secondary),
            frame_sentence(&mut rng, primary),
        ]
        .join(" ");
        articles.push(Article {
            id: id.clone(),
            outlet: opts.outlets[i % opts.outlets.len()],
            topic: TOPICS[(i / opts.outlets.len()) % TOPICS.len()].to_string(),
            headline,
            body,
            published: None,
        });
        article_frames.push((id, primary, secondary));
    }

    // Conditions in equal shares, then exact health quotas per condition.
    let mut conditions: Vec<AlignmentCondition> =
        (0..opts.n_comments).map(|i| AlignmentCondition::ALL[i % 3]).collect();
    conditions.shuffle(&mut rng);
    let mut health = vec![false; opts.n_comments];
    for (k, cond) in AlignmentCondition::ALL.into_iter().enumerate() {
        let mut idx: Vec<usize> = (0..opts.n_comments).filter(|&i| conditions[i] == cond).collect();
        idx.shuffle(&mut rng);
        let healthy = quota(idx.len(), opts.health_rates[k]);
        for &i in &idx[..healthy] {
            health[i] = true;
        }
    }

    let toxicity = |rng: &mut ChaCha8Rng, healthy: bool| {
        opts.toxicity.then(|| {
            if healthy {
                rng.random_range(0.0..0.45)
            } else {
                rng.random_range(0.2..0.95)
            }
        })
    };

    let mut comments = Vec::new();
    let mut planted = Vec::with_capacity(opts.n_comments);
    for i in 0..opts.n_comments {
        let (article_id, primary, secondary) = &article_frames[i % opts.n_articles];
        let frame = match conditions[i] {
            AlignmentCondition::Match => *primary,
            AlignmentCondition::Selective => *secondary,
            AlignmentCondition::Complete => {
                let others: Vec<FrameLabel> =
                    frames.iter().copied().filter(|f| f != primary && f != secondary).collect();
                others[rng.random_range(0..others.len())]
            }
        };
        let id = format!("c{:06}", i + 1);
        let body = comment_text(&mut rng, frame, health[i]);
        let tox = toxicity(&mut rng, health[i]);
        comments.push(Comment {
            id: id.clone(),
            article_id: article_id.clone(),
            parent_id: None,
            depth: 1,
            body,
            gold_health: Some(health[i]),
            gold_confidence: Some(1.0),
            toxicity: tox,
        });
        for r in 0..opts.replies_per_comment {
            let p = if health[i] { opts.reply_health.1 } else { opts.reply_health.0 };
            let healthy = rng.random_bool(p);
            let reply_frame = frames[rng.random_range(0..frames.len())];
            let body = comment_text(&mut rng, reply_frame, healthy);
            let tox = toxicity(&mut rng, healthy);
            comments.push(Comment {
                id: format!("{id}r{}", r + 1),
                article_id: article_id.clone(),
                parent_id: Some(id.clone()),
                depth: 2,
                body,
                gold_health: Some(healthy),
                gold_confidence: Some(1.0),
                toxicity: tox,
            });
        }
        planted.push(PlantedComment {
            id,
            condition: conditions[i],
            frame,
            healthy: health[i],
        });
    }

    SynthCorpus {
        corpus: Corpus::from_records(articles, comments, &LoadOptions::default()),
        planted,
        article_frames,
    }
}

/// Class sizes for a synthetic labeled split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitShape {
    pub healthy_confident: usize,
    pub healthy_unsure: usize,
    pub unhealthy_confident: usize,
    pub unhealthy_unsure: usize,
}

/// A shuffled labeled split with confident records at confidence ≥ 0.8 and
/// the rest below it.
pub fn labeled_split(name: SplitName, shape: SplitShape, seed: u64) -> LabeledSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let groups = [
        (true, shape.healthy_confident, true),
        (true, shape.healthy_unsure, false),
        (false, shape.unhealthy_confident, true),
        (false, shape.unhealthy_unsure, false),
    ];
    for (label, n, confident) in groups {
        for _ in 0..n {
            let confidence = if confident {
                rng.random_range(0.8..=1.0)
            } else {
                rng.random_range(0.5..0.8)
            };
            records.push(LabeledRecord {
                text: format!("record {}", records.len() + 1),
                label,
                confidence,
            });
        }
    }
    records.shuffle(&mut rng);
    LabeledSplit { name, records }
}
