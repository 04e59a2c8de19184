//! Model fits from pre-scored CSV tables.

use std::io::Write;

use frameguard::pipeline::{health_models_from_table, reply_health_from_table, AnalysisOptions, Section};
use frameguard_stats::DataTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn csv_table(header: &str, rows: &[String]) -> DataTable {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "{header}").unwrap();
    for r in rows {
        writeln!(f, "{r}").unwrap();
    }
    DataTable::from_csv_path(f.path()).unwrap()
}

fn comment_rows(seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = [("Match", 0.9), ("Selective", 0.75), ("Complete", 0.55)];
    let frames = ["Economic", "HealthSafety", "Morality"];
    let topics = ["Taxes", "Vaccines"];
    (0..3_000)
        .map(|i| {
            let (cond, p) = rates[i % 3];
            let healthy = u8::from(rng.random::<f64>() < p);
            format!("{healthy},{},{cond},{},art{}", frames[(i / 3) % 3], topics[i % 2], i % 60)
        })
        .collect()
}

const COMMENT_HEADER: &str = "health,article_frame,frame_condition,topic,article_id";

#[test]
fn health_models_recover_condition_ordering() {
    let table = csv_table(COMMENT_HEADER, &comment_rows(5));
    let models = health_models_from_table(&table, &AnalysisOptions::default()).unwrap();
    assert!(models.article_frame.ok().is_some(), "{:?}", models.article_frame);
    let cond = models.frame_condition.ok().expect("frame condition fit");
    let emm = |l: &str| cond.emm.levels.iter().find(|x| x.level == l).unwrap().response;
    assert!(emm("Match") > emm("Selective") && emm("Selective") > emm("Complete"));
    assert_eq!(models.alignment_counts["Match"].total, 1_000);
}

#[test]
fn non_binary_health_is_rejected() {
    let mut rows = comment_rows(6);
    rows[0] = "0.7,Economic,Match,Taxes,art0".into();
    let table = csv_table(COMMENT_HEADER, &rows);
    assert!(health_models_from_table(&table, &AnalysisOptions::default()).is_err());
}

#[test]
fn missing_column_is_an_error() {
    let table = csv_table("health,article_frame,topic", &["1,Economic,Taxes".to_string()]);
    assert!(health_models_from_table(&table, &AnalysisOptions::default()).is_err());
    assert!(reply_health_from_table(&table, &AnalysisOptions::default()).is_err());
}

#[test]
fn reply_health_recovers_top_comment_effect() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let frames = ["Economic", "HealthSafety", "Morality"];
    let rows: Vec<String> = (0..600)
        .map(|i| {
            let healthy = i % 2 == 0;
            let mrh = if healthy { 0.8 } else { 0.6 } + 0.05 * (rng.random::<f64>() - 0.5);
            let label = if healthy { "Healthy" } else { "Unhealthy" };
            format!("{mrh},{label},{},{}", frames[(i / 2) % 3], ["Taxes", "Vaccines"][i % 5 % 2])
        })
        .collect();
    let table = csv_table("mrh,top_c_health,top_c_frame,topic", &rows);
    let section = reply_health_from_table(&table, &AnalysisOptions::default()).unwrap();
    let Section::Ok(fit) = section else {
        panic!("fit failed: {section:?}")
    };
    assert_eq!(fit.n_threads, 600);
    let row = fit
        .coefficients
        .iter()
        .find(|c| c.predictor == "top_c_health[Healthy]")
        .expect("health coefficient");
    assert!((row.estimate - 0.2).abs() < 0.02, "{row:?}");
    assert!(fit.r2 > 0.9);
}
