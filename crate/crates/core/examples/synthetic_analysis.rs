//! Generates a synthetic two-outlet corpus with a known health gradient
//! across alignment conditions and runs the full analysis report on it.
//!
//! `cargo run --release -p frameguard --example synthetic_analysis`

use frameguard::pipeline::{analyze_corpus, render_text, AnalysisOptions};
use frameguard::synth::{generate, SynthOptions};
use frameguard::Scorers;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&SynthOptions {
        seed: 7,
        n_comments: 6_000,
        replies_per_comment: 2,
        toxicity: true,
        ..SynthOptions::default()
    });
    println!(
        "{} articles, {} comments",
        synth.corpus.articles.len(),
        synth.corpus.comments.len()
    );
    let report = analyze_corpus(&synth.corpus, &Scorers::baseline(), &AnalysisOptions::default())?;
    print!("{}", render_text(&report));
    Ok(())
}
