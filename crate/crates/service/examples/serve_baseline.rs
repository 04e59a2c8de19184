//! Serves the HTTP API with the lexicon scorers, a synthetic corpus for
//! search and no language model, so moderation uses fallback guidance.
//!
//! `cargo run -p frameguard-service --example serve_baseline`, then e.g.
//! `curl -s localhost:8080/api/topics/search?q=vaccine`.

use frameguard::synth::{generate, SynthOptions};
use frameguard_service::{router, serve, AppState};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate(&SynthOptions {
        n_comments: 200,
        ..SynthOptions::default()
    });
    let state = AppState::baseline().with_corpus(synth.corpus);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
    println!("listening on http://{}", listener.local_addr()?);
    serve(listener, router(state), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}
