//! Loads a small JSONL corpus, reports depth diagnostics, then rebalances a
//! synthetic labeled training split to two healthy comments per unhealthy one.
//!
//! `cargo run -p frameguard --example ingest_and_rebalance`

use frameguard::corpus::{load_corpus_from_readers, Format, LoadOptions, SplitName};
use frameguard::synth::{labeled_split, SplitShape};
use frameguard::{rebalance, RebalanceOptions};

const ARTICLES: &str = r#"{"id":"a1","outlet":"NYT","topic":"Healthcare","headline":"Clinic funding","body":"The state cut clinic budgets.","published":"2017-05-02"}
"#;

const COMMENTS: &str = r#"{"id":"c1","article_id":"a1","depth":1,"body":"This will hurt rural patients."}
{"id":"c2","article_id":"a1","parent_id":"c1","depth":2,"body":"Rural hospitals were already closing."}
{"id":"c3","article_id":"a1","parent_id":"c2","depth":3,"body":"Source?"}
{"id":"c4","article_id":"a1","depth":1,"body":"Lower taxes matter more."}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus_from_readers(
        ARTICLES.as_bytes(),
        COMMENTS.as_bytes(),
        Format::Jsonl,
        &LoadOptions { max_depth: 2 },
    )?;
    println!(
        "{} articles, {} comments, flagged beyond depth {}: {:?}",
        corpus.articles.len(),
        corpus.comments.len(),
        corpus.max_depth,
        corpus.flagged
    );

    let split = labeled_split(
        SplitName::Train,
        SplitShape {
            healthy_confident: 29_500,
            healthy_unsure: 3_348,
            unhealthy_confident: 2_649,
            unhealthy_unsure: 6,
        },
        2,
    );
    let before = split.counts();
    let out = rebalance(&split, &RebalanceOptions::default())?;
    let after = out.split.counts();
    println!(
        "train: {}/{} healthy/unhealthy -> {}/{} ({} dropped below confidence)",
        before.healthy, before.unhealthy, after.healthy, after.unhealthy, out.below_threshold
    );
    Ok(())
}
