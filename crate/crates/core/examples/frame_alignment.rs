//! Frames an article and several comments with the lexicon scorer and prints
//! the resulting alignment condition for each comment.
//!
//! `cargo run -p frameguard --example frame_alignment`

use frameguard::{analyze_article, classify_alignment, Scorers};

const ARTICLE: &str = "The vaccine mandate takes effect in March. Hospitals report fewer infections and \
shorter wait times for patients. Critics say the cost to taxpayers is rising. A court will hear \
a challenge next month.";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scorers = Scorers::baseline();
    let article = analyze_article(ARTICLE, &scorers)?;
    println!("article primary: {}", article.frames.primary);
    for w in &article.frames.top_k {
        println!("  {:<18} {:.3}", w.frame.to_string(), w.weight);
    }
    println!("secondaries: {:?}", article.frames.secondaries);

    for comment in [
        "Fewer infections means the vaccine is working for patients.",
        "Taxpayers should not foot this bill.",
        "This is about freedom and our traditions.",
    ] {
        let frames = scorers.score_frames(comment)?.0;
        let condition = classify_alignment(frames.primary, &article.frames);
        println!("{:<9} {:<18} {comment}", condition.to_string(), frames.primary.to_string());
    }
    Ok(())
}
