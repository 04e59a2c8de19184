//! Simulates random-intercept logistic data with three conditions, fits the
//! mixed model and prints Wald tests, marginal means and Tukey-adjusted odds
//! ratios.
//!
//! `cargo run --release -p frameguard-stats --example glmm_simulation`

use frameguard_stats::{
    emmeans, fit_glmm_logit, pairwise_or, wald_type2, DataTable, EmmWeights, FactorSpec, GlmmOptions, ModelSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let intercepts = Normal::new(0.0, 0.6)?;
    let effects: [(&str, f64); 3] = [("Match", 1.6), ("Selective", 1.4), ("Complete", 1.1)];
    let (mut y, mut cond, mut group) = (vec![], vec![], vec![]);
    for g in 0..150 {
        let u = intercepts.sample(&mut rng);
        for i in 0..30 {
            let (name, b) = effects[i % 3];
            let p = 1.0 / (1.0 + (-(b + u)).exp());
            y.push(f64::from(u8::from(rng.random::<f64>() < p)));
            cond.push(name.to_string());
            group.push(format!("article{g}"));
        }
    }
    let table = DataTable::new()
        .with_numeric("healthy", y)
        .with_categorical("condition", cond)
        .with_categorical("article", group);
    let spec = ModelSpec::new("healthy")
        .factor(FactorSpec::new("condition").reference("Match"))
        .grouping("article");
    let fit = fit_glmm_logit(&spec, &table, &GlmmOptions::default())?;

    println!("converged {}, sigma {:.3}, loglik {:.2}", fit.converged, fit.sigma(), fit.loglik);
    for (j, name) in fit.info.columns.iter().enumerate() {
        println!("  {name:<22} {:>8.4} (se {:.4}, p {:.2e})", fit.beta[j], fit.se[j], fit.p[j]);
    }
    let w = wald_type2(&fit, "condition")?;
    println!("Wald chi2({}) = {:.2}, p = {:.2e}", w.df, w.statistic, w.p);

    let emm = emmeans(&fit, "condition", EmmWeights::Equal)?;
    for l in &emm.levels {
        println!("  EMM {:<10} {:.3}", l.level, l.response);
    }
    for c in pairwise_or(&emm, &fit)? {
        println!(
            "  {} / {}: OR {:.3}, Tukey p {:.2e}",
            c.pair.0, c.pair.1, c.odds_ratio, c.p_adjusted
        );
    }
    Ok(())
}
