//! Compares two binary annotations with Cohen's kappa and two score vectors
//! with Spearman's rank correlation.
//!
//! `cargo run -p frameguard-stats --example agreement`

use frameguard_stats::{cohen_kappa, spearman};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let healthy = [true, true, false, true, false, true, true, false, true, true];
    let non_toxic = [true, true, true, true, false, true, false, false, true, true];
    println!("kappa = {:.4}", cohen_kappa(&healthy, &non_toxic)?);

    let health = [0.91, 0.85, 0.12, 0.77, 0.30, 0.66, 0.58, 0.20, 0.95, 0.71];
    let toxicity = [0.05, 0.10, 0.80, 0.15, 0.65, 0.20, 0.55, 0.70, 0.02, 0.10];
    println!("rho   = {:.4}", spearman(&health, &toxicity)?);
    Ok(())
}
