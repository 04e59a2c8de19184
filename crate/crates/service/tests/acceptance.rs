//! Release gate. Each criterion runs in isolation with its time budget and
//! prints one PASS or FAIL line; the process fails if any criterion does.
//!
//! Run with `cargo test -p frameguard-service --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config as PropConfig, RngAlgorithm, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use frameguard::corpus::{rebalance, Article, Corpus, LoadOptions, Outlet, RebalanceOptions, SplitName};
use frameguard::framing::{
    aggregate_frames, classify_alignment, AggregateOptions, AlignmentCondition, FrameAnalysis, FrameLabel,
};
use frameguard::pipeline::{analyze_corpus, AnalysisOptions, Scorers};
use frameguard::reformulator::{
    build_prompt, fallback_guidance, moderate, parse_guidance, GuidanceSource, ModerationContext, ModerationGuidance,
    PromptOptions, TextGenerator, GENERATION_ATTEMPTS,
};
use frameguard::riskengine::{assess, trigger, Action, RiskLevel, RuleSet};
use frameguard::scoring::{FrameScorer, HealthScore, HealthScorer, ScoringError};
use frameguard::synth::{generate, labeled_split, SplitShape, SynthOptions};
use frameguard_service::{router, serve, AppState};
use frameguard_stats::{
    cohen_kappa, emmeans, fit_glmm_logit, fit_ols, laplace_loglik, pairwise_or, spearman, wald_type2, DataTable,
    Design, EmmWeights, FactorSpec, GlmmOptions, ModelSpec, VarianceConstraint,
};
use frameguard_testkit::{agreement as agreement_oracle, logistic, ols as ols_oracle, quadrature, risk, sim};

type Check = Box<dyn FnOnce() -> String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: Check,
}

fn criterion(name: &'static str, budget_secs: u64, check: impl FnOnce() -> String + 'static) -> Criterion {
    Criterion {
        name,
        budget: Duration::from_secs(budget_secs),
        check: Box::new(check),
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|_| {}));
    let criteria = vec![
        criterion("risk engine truth table", 1, risk_truth_table),
        criterion("alignment classifier", 5, alignment_classifier),
        criterion("glmm recovery and laplace accuracy", 60, glmm_recovery),
        criterion("zero-variance glmm equals logistic", 60, zero_variance_glmm),
        criterion("ols against normal equations", 60, ols_oracle_check),
        criterion("wald, emm and tukey properties", 60, wald_emm_tukey),
        criterion("end-to-end alignment gradient", 300, end_to_end_gradient),
        criterion("agreement metrics", 60, agreement_metrics),
        criterion("rebalance two-to-one", 60, rebalance_two_to_one),
        criterion("prompt, parse and service endpoints", 60, prompt_parse_service),
    ];
    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(detail) if elapsed <= c.budget => (true, detail),
            Ok(detail) => (false, format!("{detail}; took longer than {:?}", c.budget)),
            Err(p) => (false, panic_message(p)),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {} [{:.2}s / {}s] {}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------------------
// Risk engine

fn risk_truth_table() -> String {
    let rules = RuleSet::default();
    let mut cases = 0;
    for i in 0..=20 {
        let h = f64::from(i) / 20.0;
        for a in AlignmentCondition::ALL {
            let (level, action) = risk::expected(h, a.as_str());
            let got = assess(h, a);
            assert_eq!(got.level.as_str(), level.to_lowercase(), "level at ({h}, {a})");
            let action_name = match got.action {
                Action::Allow => "Allow",
                Action::Suggest => "Suggest",
                Action::SuggestAndFlag => "SuggestAndFlag",
            };
            assert_eq!(action_name, action, "action at ({h}, {a})");
            assert_eq!(got.allow_post, got.level != RiskLevel::High);
            let table = rules.assess(h, a).unwrap();
            assert_eq!((table.level, table.matched_rule.as_str()), (got.level, got.matched_rule));
            cases += 1;
        }
    }
    assert_eq!(cases, 63);
    let boundary = [
        (0.3, AlignmentCondition::Match, "R3"),
        (0.5, AlignmentCondition::Complete, "R3"),
        (0.45, AlignmentCondition::Complete, "R2"),
        (0.6, AlignmentCondition::Match, "R5"),
        (0.6, AlignmentCondition::Selective, "R4"),
    ];
    for (h, a, rule) in boundary {
        assert_eq!(assess(h, a).matched_rule, rule, "({h}, {a})");
    }
    format!("{cases} cases and {} boundaries", boundary.len())
}

// ---------------------------------------------------------------------------
// Alignment

fn article_frames(primary: FrameLabel, secondaries: &[FrameLabel]) -> FrameAnalysis {
    let mut pairs = vec![(primary, 1.0); 3];
    pairs.extend(secondaries.iter().map(|&s| (s, 0.9)));
    aggregate_frames(&pairs, &AggregateOptions::default()).unwrap()
}

/// Expected alignment by direct tally of label confidence shares.
fn tally_alignment(pairs: &[(FrameLabel, f64)], comment: FrameLabel) -> AlignmentCondition {
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let share = |l: FrameLabel| {
        let (n, s) = pairs
            .iter()
            .filter(|p| p.0 == l)
            .fold((0.0, 0.0), |(n, s), p| (n + 1.0, s + p.1));
        if total > 0.0 {
            s / total
        } else {
            n / pairs.len() as f64
        }
    };
    let present = |l: FrameLabel| pairs.iter().any(|p| p.0 == l);
    let best = FrameLabel::ALL.iter().map(|&l| share(l)).fold(f64::MIN, f64::max);
    let primary = *FrameLabel::ALL
        .iter()
        .find(|&&l| present(l) && best - share(l) < 1e-9)
        .unwrap();
    if comment == primary {
        AlignmentCondition::Match
    } else if present(comment) && share(comment) >= 0.10 - 1e-9 {
        AlignmentCondition::Selective
    } else {
        AlignmentCondition::Complete
    }
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        PropConfig {
            cases: 10_000,
            failure_persistence: None,
            ..PropConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn alignment_classifier() -> String {
    use FrameLabel::*;
    let a = article_frames(HealthSafety, &[Economic, PoliticalPolicies, Morality]);
    assert_eq!(classify_alignment(PoliticalPolicies, &a), AlignmentCondition::Selective);
    let b = article_frames(PoliticalPolicies, &[LegalityCrime, Morality, CulturalIdentity]);
    assert_eq!(classify_alignment(HealthSafety, &b), AlignmentCondition::Complete);

    let label = (0usize..10).prop_map(|i| FrameLabel::ALL[i]);
    let sentences =
        proptest::collection::vec((label.clone(), (0u32..=100).prop_map(|k| f64::from(k) / 100.0)), 1..25);
    let strategy = (sentences, label, any_seed(), 1u32..=20);
    let opts = AggregateOptions::default();
    let cases = AtomicUsize::new(0);
    runner()
        .run(&strategy, |(pairs, comment, seed, scale)| {
            cases.fetch_add(1, Ordering::Relaxed);
            let base = aggregate_frames(&pairs, &opts).expect("total on non-empty input");
            let expected = tally_alignment(&pairs, comment);
            let got = classify_alignment(comment, &base);
            assert_eq!(got, expected, "{pairs:?} / {comment}");

            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let permuted = aggregate_frames(&shuffled, &opts).unwrap();
            assert_eq!(classify_alignment(comment, &permuted), got, "permutation");
            assert_eq!((permuted.primary, &permuted.secondaries), (base.primary, &base.secondaries));

            let factor = f64::from(scale) / 20.0;
            let scaled: Vec<_> = pairs.iter().map(|&(l, c)| (l, c * factor)).collect();
            let rescaled = aggregate_frames(&scaled, &opts).unwrap();
            assert_eq!(classify_alignment(comment, &rescaled), got, "rescaling by {factor}");
            Ok(())
        })
        .map_err(|e| e.to_string())
        .unwrap();
    format!("2 worked examples, {} generated cases", cases.into_inner())
}

fn any_seed() -> impl Strategy<Value = u64> {
    proptest::num::u64::ANY
}

// ---------------------------------------------------------------------------
// GLMM

fn glmm_recovery() -> String {
    let (b0, b1, sigma) = (-0.5, 1.0, 0.7);
    let mut passes = 0;
    let mut notes = Vec::new();
    for seed in 0..20u64 {
        let s = sim::random_intercept_logit(1_000 + seed, 300, 20, b0, b1, sigma);
        let table = DataTable::new()
            .with_numeric("y", s.y)
            .with_numeric("x", s.x)
            .with_categorical("g", s.group);
        let spec = ModelSpec::new("y").covariate("x").grouping("g");
        let fit = fit_glmm_logit(&spec, &table, &GlmmOptions::default()).unwrap();
        let coef_ok = ((fit.beta[0] - b0) / fit.se[0]).abs() < 3.0 && ((fit.beta[1] - b1) / fit.se[1]).abs() < 3.0;
        let sigma_ok = ((fit.sigma2.sqrt() - sigma) / sigma).abs() < 0.5;
        if coef_ok && sigma_ok && fit.converged {
            passes += 1;
        } else {
            notes.push(format!("seed {seed}: beta {:?} sigma {:.3}", fit.beta.as_slice(), fit.sigma2.sqrt()));
        }
    }
    assert!(passes >= 18, "{passes}/20 seeds recovered: {notes:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for case in 0..5 {
        let s = sim::random_intercept_logit(500 + case, 5, 4, 0.1, 0.7, 0.8);
        let table = DataTable::new()
            .with_numeric("y", s.y)
            .with_numeric("x", s.x)
            .with_categorical("g", s.group);
        let spec = ModelSpec::new("y").covariate("x").grouping("g");
        let design = Design::build(&spec, &table).unwrap();
        let beta = DVector::from_vec(vec![rng.random::<f64>() - 0.5, rng.random::<f64>()]);
        let sigma2 = 0.2 + 0.6 * rng.random::<f64>();
        let members = &design.grouping.as_ref().unwrap().members;
        let eta: Vec<Vec<f64>> = members
            .iter()
            .map(|m| m.iter().map(|&i| (design.x.row(i) * &beta)[0]).collect())
            .collect();
        let y: Vec<Vec<f64>> = members.iter().map(|m| m.iter().map(|&i| design.y[i]).collect()).collect();
        let exact = quadrature::marginal_loglik(&eta, &y, sigma2, 50);
        let approx = laplace_loglik(&design, &beta, sigma2);
        let rel = ((approx - exact) / exact).abs();
        worst = worst.max(rel);
        assert!(rel < 0.02, "case {case}: laplace {approx} vs quadrature {exact}");
    }
    format!("{passes}/20 seeds recovered; worst laplace error {:.3}%", 100.0 * worst)
}

/// Logistic data with two factors, a covariate and a grouping column.
fn factor_table(seed: u64, n: usize) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut y, mut a, mut b, mut x, mut g) = (vec![], vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let ia = rng.random_range(0..3usize);
        let ib = rng.random_range(0..2usize);
        let xv = rng.random::<f64>() * 2.0 - 1.0;
        let eta = 0.4 + [0.0, 0.5, -0.4][ia] + 0.3 * ib as f64 + 0.6 * xv;
        let p = 1.0 / (1.0 + (-eta).exp());
        y.push(f64::from(u8::from(rng.random::<f64>() < p)));
        a.push(["p", "q", "r"][ia].to_string());
        b.push(["u", "v"][ib].to_string());
        x.push(xv);
        g.push(format!("g{}", i % 30));
    }
    DataTable::new()
        .with_numeric("y", y)
        .with_categorical("a", a)
        .with_categorical("b", b)
        .with_numeric("x", x)
        .with_categorical("g", g)
}

fn factor_spec() -> ModelSpec {
    ModelSpec::new("y")
        .factor(FactorSpec::new("a").reference("p"))
        .factor(FactorSpec::new("b").reference("u"))
        .covariate("x")
        .grouping("g")
}

fn zero_variance() -> GlmmOptions {
    GlmmOptions {
        variance: VarianceConstraint::Fixed(0.0),
        ..GlmmOptions::default()
    }
}

fn zero_variance_glmm() -> String {
    let mut worst: f64 = 0.0;
    for seed in [11, 12, 13] {
        let table = factor_table(seed, 800);
        let fit = fit_glmm_logit(&factor_spec(), &table, &zero_variance()).unwrap();
        let design = Design::build(&factor_spec(), &table).unwrap();
        let y: Vec<f64> = design.y.iter().copied().collect();
        let oracle = logistic::fit(&design.x, &y);
        for j in 0..oracle.len() {
            let d = (fit.beta[j] - oracle[j]).abs();
            worst = worst.max(d);
            assert!(d < 1e-6, "seed {seed} coefficient {j}: {} vs {}", fit.beta[j], oracle[j]);
        }
    }
    format!("3 fixtures, max coefficient difference {worst:.2e}")
}

// ---------------------------------------------------------------------------
// OLS

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn ols_oracle_check() -> String {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let (n, p) = (150 + 10 * seed as usize, 3 + seed as usize % 4);
        let (cols, y) = sim::linear_design(900 + seed, n, p);
        let mut table = DataTable::new().with_numeric("y", y.clone());
        let mut spec = ModelSpec::new("y");
        for (i, c) in cols.iter().enumerate() {
            table = table.with_numeric(format!("c{i}"), c.clone());
            spec = spec.covariate(format!("c{i}"));
        }
        let fit = fit_ols(&spec, &table).unwrap();
        let x = DMatrix::from_fn(n, p, |r, c| if c == 0 { 1.0 } else { cols[c - 1][r] });
        let ne = ols_oracle::fit(&x, &DVector::from_vec(y));
        let mut diffs = vec![rel(fit.r2, ne.r2), rel(fit.f_stat, ne.f_stat)];
        for j in 0..p {
            diffs.push(rel(fit.beta[j], ne.beta[j]));
            diffs.push(rel(fit.se[j], ne.se[j]));
        }
        let m = diffs.into_iter().fold(0.0, f64::max);
        worst = worst.max(m);
        assert!(m < 1e-8, "seed {seed}: relative difference {m:e}");
    }
    let xs: Vec<f64> = (0..30).map(|i| f64::from(i) * 0.5).collect();
    let zs: Vec<f64> = (0..30).map(|i| f64::from((i * 7) % 11)).collect();
    let y: Vec<f64> = xs.iter().zip(&zs).map(|(x, z)| 2.0 - 1.5 * x + 0.25 * z).collect();
    let table = DataTable::new()
        .with_numeric("y", y)
        .with_numeric("x", xs)
        .with_numeric("z", zs);
    let fit = fit_ols(&ModelSpec::new("y").covariate("x").covariate("z"), &table).unwrap();
    assert!((fit.r2 - 1.0).abs() < 1e-12, "noiseless R2 {}", fit.r2);
    format!("10 designs, worst relative difference {worst:.2e}; noiseless R2 = 1")
}

// ---------------------------------------------------------------------------
// Wald, EMM, Tukey

fn wald_emm_tukey() -> String {
    let mut checks = 0;
    for seed in [21, 22, 23] {
        let table = factor_table(seed, 1_500);
        let fit = fit_glmm_logit(&factor_spec(), &table, &GlmmOptions::default()).unwrap();
        let j = fit.info.columns.iter().position(|c| c == "x").unwrap();
        let w = wald_type2(&fit, "x").unwrap();
        let expected = (fit.beta[j] / fit.se[j]).powi(2);
        assert_eq!(w.df, 1);
        assert!(rel(w.statistic, expected) < 1e-12, "{} vs {expected}", w.statistic);

        let emm = emmeans(&fit, "a", EmmWeights::Equal).unwrap();
        let pairs = pairwise_or(&emm, &fit).unwrap();
        for p in &pairs {
            assert!(p.p_adjusted >= p.p_unadjusted, "{:?}", p.pair);
            let back = frameguard_stats::contrast(&emm, &fit, &p.pair.1, &p.pair.0).unwrap();
            assert!((p.log_odds_ratio + back.log_odds_ratio).abs() < 1e-12);
            assert!((p.odds_ratio * back.odds_ratio - 1.0).abs() < 1e-12);
            checks += 1;
        }

        // One factor without a random effect is saturated: EMMs are the
        // observed proportions.
        let saturated = ModelSpec::new("y").factor(FactorSpec::new("a").reference("p"));
        let fit = fit_glmm_logit(&saturated, &table, &zero_variance()).unwrap();
        let emm = emmeans(&fit, "a", EmmWeights::Equal).unwrap();
        let ys = table.column("y").unwrap();
        let ac = table.column("a").unwrap();
        for level in ["p", "q", "r"] {
            let rows: Vec<usize> = (0..table.nrows()).filter(|&r| ac.level_at(r).unwrap() == level).collect();
            let observed = rows.iter().map(|&r| ys.numeric_at(r).unwrap()).sum::<f64>() / rows.len() as f64;
            let got = emm.level(level).unwrap().response;
            assert!((got - observed).abs() < 1e-6, "{level}: {got} vs {observed}");
        }
    }
    format!("3 fits, {checks} pairwise comparisons")
}

// ---------------------------------------------------------------------------
// End-to-end gradient

fn end_to_end_gradient() -> String {
    let synth = generate(&SynthOptions {
        seed: 2024,
        n_articles: 200,
        n_comments: 20_000,
        outlets: vec![Outlet::Nyt],
        health_rates: [0.83, 0.81, 0.78],
        ..SynthOptions::default()
    });
    let report = analyze_corpus(&synth.corpus, &Scorers::baseline(), &AnalysisOptions::default()).unwrap();
    let models = &report.outlets["NYT"];
    let observed: Vec<(String, f64)> = models
        .alignment_counts
        .iter()
        .map(|(k, p)| (k.clone(), p.proportion))
        .collect();
    let cond = models
        .frame_condition
        .ok()
        .unwrap_or_else(|| panic!("frame condition model missing: {:?}", models.frame_condition));
    let emm = |level: &str| cond.emm.levels.iter().find(|l| l.level == level).unwrap().response;
    let (m, s, c) = (emm("Match"), emm("Selective"), emm("Complete"));
    assert!(m > s && s > c, "EMMs {m:.4} / {s:.4} / {c:.4}; observed {observed:?}");
    let worst = cond.pairwise.iter().map(|p| p.p_adjusted).fold(0.0, f64::max);
    assert_eq!(cond.pairwise.len(), 3);
    assert!(worst < 0.05, "largest adjusted p {worst}: {:?}", cond.pairwise);
    format!("EMMs {m:.3} > {s:.3} > {c:.3}, largest Tukey p {worst:.2e}")
}

// ---------------------------------------------------------------------------
// Agreement

fn agreement_metrics() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut compared = 0;
    for _ in 0..1_000 {
        let n = rng.random_range(8..80);
        let p = rng.random::<f64>();
        let a: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < p).collect();
        let b: Vec<bool> = a
            .iter()
            .map(|&v| if rng.random::<f64>() < 0.75 { v } else { rng.random() })
            .collect();
        let oracle = agreement_oracle::kappa(&a, &b);
        if oracle.is_finite() {
            let k = cohen_kappa(&a, &b).unwrap();
            assert!((k - oracle).abs() < 1e-12, "kappa {k} vs {oracle}");
        }
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..10u8))).collect();
        let y: Vec<f64> = x.iter().map(|v| -v + f64::from(rng.random_range(0..6u8))).collect();
        if let Ok(r) = spearman(&x, &y) {
            let o = agreement_oracle::spearman(&x, &y);
            assert!((r - o).abs() < 1e-12, "rho {r} vs {o}");
        }
        compared += 1;
    }
    let v = [true, false, true, true, false];
    assert!((cohen_kappa(&v, &v).unwrap() - 1.0).abs() < 1e-15);
    // Observed agreement 1/2 equals chance agreement 1/2.
    let k0 = cohen_kappa(&[true, true, false, false], &[true, false, true, false]).unwrap();
    assert!(k0.abs() < 1e-15, "hand case {k0}");
    format!("{compared} random vector pairs, identity and zero cases")
}

// ---------------------------------------------------------------------------
// Rebalance

fn rebalance_two_to_one() -> String {
    let shapes = [
        (
            SplitName::Train,
            SplitShape {
                healthy_confident: 29_500,
                healthy_unsure: 3_348,
                unhealthy_confident: 2_649,
                unhealthy_unsure: 6,
            },
            (5_298, 2_649),
        ),
        (
            SplitName::Val,
            SplitShape {
                healthy_confident: 3_700,
                healthy_unsure: 391,
                unhealthy_confident: 331,
                unhealthy_unsure: 5,
            },
            (662, 331),
        ),
    ];
    let mut out = Vec::new();
    for (i, (name, shape, expected)) in shapes.into_iter().enumerate() {
        let split = labeled_split(name, shape, 10 + i as u64);
        let once = rebalance(&split, &RebalanceOptions::default()).unwrap();
        let c = once.split.counts();
        assert_eq!((c.healthy, c.unhealthy), expected, "{name:?}");
        let twice = rebalance(&once.split, &RebalanceOptions::default()).unwrap();
        assert_eq!(twice.split, once.split, "{name:?} is not idempotent");
        out.push(format!("{name:?} {}/{}", c.healthy, c.unhealthy));
    }
    out.join(", ")
}

// ---------------------------------------------------------------------------
// Prompt, parse and service

const MARKERS: [&str; 6] = [
    "You are an AI comment moderator. Analyze this comment for health and frame transfer (reframing). Provide \
     constructive suggestions only when the comment is unhealthy or uses a completely different perspective from \
     the article.",
    "CONTEXT:",
    "Comment to Analyze:",
    "Trigger: This comment requires intervention due to:",
    "1. Confirm the risk level (low, medium, high).\n2. Provide 2-3 specific, constructive reformulations that:\n- \
     Improve health if unhealthy\n- Help align comment with article frames if reframing is detected\n- Maintain \
     the core message\n3. Determine if the original comment should be allowed.",
    "Provide a JSON response.",
];

struct AlwaysFails(AtomicUsize);

impl TextGenerator for AlwaysFails {
    fn generate(&self, _prompt: &str) -> Result<String, ScoringError> {
        if self.0.fetch_add(1, Ordering::SeqCst) % 2 == 0 {
            Err(ScoringError::Timeout {
                endpoint: "mock".into(),
                timeout_ms: 1,
            })
        } else {
            Ok("not json at all".into())
        }
    }
}

struct ThreeSuggestions;

impl TextGenerator for ThreeSuggestions {
    fn generate(&self, _prompt: &str) -> Result<String, ScoringError> {
        Ok(r#"{"risk_level": "high", "suggestions": ["one", "two", "three"], "allow_post": false}"#.into())
    }
}

struct MockHealth;

impl HealthScorer for MockHealth {
    fn score_batch(&self, texts: &[String]) -> Result<Vec<f64>, ScoringError> {
        Ok(texts.iter().map(|t| if t.contains("idiot") { 0.1 } else { 0.9 }).collect())
    }

    fn describe(&self) -> String {
        "mock-health".into()
    }
}

struct MockFrames;

impl FrameScorer for MockFrames {
    fn label_sentences(&self, sentences: &[String]) -> Result<Vec<(FrameLabel, f64)>, ScoringError> {
        Ok(sentences
            .iter()
            .map(|s| {
                if s.contains("tax") {
                    (FrameLabel::Economic, 0.9)
                } else {
                    (FrameLabel::Morality, 0.6)
                }
            })
            .collect())
    }

    fn describe(&self) -> String {
        "mock-frames".into()
    }
}

fn context(health: f64, alignment: AlignmentCondition) -> ModerationContext {
    let opts = AggregateOptions::default();
    let article = aggregate_frames(&[(FrameLabel::Economic, 0.9), (FrameLabel::Morality, 0.3)], &opts).unwrap();
    let comment = aggregate_frames(&[(FrameLabel::HealthSafety, 0.8)], &opts).unwrap();
    ModerationContext {
        article_text: "The tax bill passed.".into(),
        article_top_frames: article.top_k,
        comment_text: "Hospitals will suffer.".into(),
        comment_frames: comment,
        alignment,
        health: HealthScore::new(health, 0.5),
        trigger: trigger(health, alignment, &assess(health, alignment)),
    }
}

fn prompt_parse_service() -> String {
    let ctx = context(0.2, AlignmentCondition::Complete);
    let prompt = build_prompt(&ctx, &PromptOptions::default());
    for m in MARKERS {
        assert!(prompt.contains(m), "prompt lacks marker {m:?}");
    }

    let guidance = ModerationGuidance {
        risk_level: RiskLevel::Medium,
        suggestions: vec!["Say it kindly.".into(), "Add a source.".into()],
        allow_post: true,
    };
    let bare = serde_json::to_string(&guidance).unwrap();
    assert_eq!(parse_guidance(&bare).unwrap(), guidance);
    assert_eq!(parse_guidance(&format!("```json\n{bare}\n```")).unwrap(), guidance);
    assert_eq!(parse_guidance(&format!("Sure.\n```\n{bare}\n```")).unwrap(), guidance);

    let risk = assess(0.2, AlignmentCondition::Complete);
    let first = moderate(&ctx, &risk, &AlwaysFails(AtomicUsize::new(0)), &PromptOptions::default());
    let second = moderate(&ctx, &risk, &AlwaysFails(AtomicUsize::new(0)), &PromptOptions::default());
    assert_eq!(first.source, GuidanceSource::Fallback);
    assert_eq!(first.attempts, GENERATION_ATTEMPTS);
    assert_eq!(first.guidance, fallback_guidance(&ctx, &risk));
    assert_eq!(first, second);
    assert!(first.degraded && !first.guidance.allow_post);

    let p95 = service_round_trip();
    format!("6 markers, fenced and bare parse, fallback; service p95 {:.1} ms", p95.as_secs_f64() * 1e3)
}

fn fixture_corpus() -> Corpus {
    let article = |id: &str, headline: &str, body: &str| Article {
        id: id.into(),
        outlet: Outlet::Nyt,
        topic: "Taxes".into(),
        headline: headline.into(),
        body: body.into(),
        published: None,
    };
    Corpus::from_records(
        vec![
            article("a1", "Tax bill passes", "The tax bill cuts rates."),
            article("a2", "School lunches", "Parents debated menus."),
        ],
        vec![],
        &LoadOptions::default(),
    )
}

/// Exercises every endpoint over a real socket and returns the p95 latency.
fn service_round_trip() -> Duration {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    std::fs::write(&report, r#"{"metadata": {"seed": 1}}"#).unwrap();
    let state = AppState::new(Scorers::new(Arc::new(MockHealth), Arc::new(MockFrames)), Arc::new(ThreeSuggestions))
        .with_corpus(fixture_corpus())
        .with_report(&report);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()
        .unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let server = rt.spawn(serve(listener, router(state), async {
        let _ = rx.await;
    }));

    let base = format!("http://{addr}");
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let latencies = Mutex::new(Vec::new());
    let call = |method: &str, path: &str, body: Option<Value>| -> (u16, Value) {
        let url = format!("{base}{path}");
        let start = Instant::now();
        let mut resp = match (method, body) {
            ("POST", Some(b)) => agent.post(&url).send_json(&b).unwrap(),
            _ => agent.get(&url).call().unwrap(),
        };
        latencies.lock().unwrap().push(start.elapsed());
        let status = resp.status().as_u16();
        (status, resp.body_mut().read_json::<Value>().unwrap())
    };

    let (status, health) = call("GET", "/api/health", None);
    assert_eq!((status, health["status"].as_str()), (200, Some("ok")));
    let (status, hits) = call("GET", "/api/topics/search?q=tax", None);
    assert_eq!((status, hits[0]["id"].as_str()), (200, Some("a1")));
    let (_, none) = call("GET", "/api/topics/search?q=zebra", None);
    assert_eq!(none, json!([]));
    let (status, r) = call("GET", "/api/reports/latest", None);
    assert_eq!((status, r["metadata"]["seed"].as_u64()), (200, Some(1)));
    let (status, article) = call("POST", "/api/articles/analyze", Some(json!({ "article_id": "a1" })));
    assert_eq!(status, 200);
    let id = article["analysis_id"].as_str().unwrap().to_string();
    let (status, e) = call("POST", "/api/articles/analyze", Some(json!({ "text": "" })));
    assert_eq!((status, e["code"].as_str()), (400, Some("bad_request")));
    let (status, e) = call("POST", "/api/comments/moderate", Some(json!({ "analysis_id": "nope", "comment": "x" })));
    assert_eq!((status, e["code"].as_str()), (404, Some("not_found")));
    for i in 0..40 {
        let (comment, level) = if i % 2 == 0 {
            ("Thanks, the tax cut deserves scrutiny.", "low")
        } else {
            ("Only an idiot supports this tax.", "high")
        };
        let (status, m) = call("POST", "/api/comments/moderate", Some(json!({ "analysis_id": id, "comment": comment })));
        assert_eq!((status, m["risk_level"].as_str()), (200, Some(level)));
        let expected = if level == "high" { 3 } else { 0 };
        assert_eq!(m["suggestions"].as_array().unwrap().len(), expected);
    }

    let _ = tx.send(());
    rt.block_on(server).unwrap().unwrap();
    let mut lat = latencies.into_inner().unwrap();
    lat.sort();
    let p95 = lat[((0.95 * lat.len() as f64).ceil() as usize).clamp(1, lat.len()) - 1];
    assert!(p95 < Duration::from_secs(2), "p95 latency {p95:?}");
    p95
}
