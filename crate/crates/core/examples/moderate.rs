//! Moderates comments against an article with a canned generator standing in
//! for the language model, then again with a generator that always fails to
//! show the deterministic fallback guidance.
//!
//! `cargo run -p frameguard --example moderate`

use frameguard::reformulator::PromptOptions;
use frameguard::scoring::ScoringError;
use frameguard::{analyze_article, moderate_comment, Scorers, TextGenerator};

const ARTICLE: &str = "Congress passed a new tax bill. The budget deficit and jobs numbers dominated the debate. \
Economists said prices and wages will rise.";

struct Canned;

impl TextGenerator for Canned {
    fn generate(&self, _prompt: &str) -> Result<String, ScoringError> {
        Ok("```json\n{\"risk_level\": \"high\", \"suggestions\": [\
            \"I worry the tax bill will raise prices for families.\", \
            \"Could the deficit numbers be explained more clearly?\"], \
            \"allow_post\": false}\n```"
            .into())
    }
}

struct Offline;

impl TextGenerator for Offline {
    fn generate(&self, _prompt: &str) -> Result<String, ScoringError> {
        Err(ScoringError::Config("offline".into()))
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scorers = Scorers::baseline();
    let article = analyze_article(ARTICLE, &scorers)?;
    let opts = PromptOptions::default();
    for comment in [
        "Thanks for the clear breakdown of the budget numbers.",
        "Only an idiot would believe these stupid lies about morality.",
    ] {
        let r = moderate_comment(&article, comment, &scorers, &Canned, &opts)?;
        println!(
            "{:<6} health {:.2} {:<9} allow {:<5} {comment}",
            r.risk_level.to_string(),
            r.health.score,
            r.alignment.to_string(),
            r.allow_post
        );
        for s in &r.suggestions {
            println!("       suggestion: {s}");
        }
    }
    let r = moderate_comment(
        &article,
        "Only an idiot would believe these stupid lies.",
        &scorers,
        &Offline,
        &opts,
    )?;
    println!("offline generator: source {:?}, degraded {}", r.guidance_source, r.degraded);
    for s in &r.suggestions {
        println!("       fallback: {s}");
    }
    Ok(())
}
