//! `frameguard` command-line tool.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use frameguard::config::Config;
use frameguard::corpus::{load_corpus, load_store, save_corpus, Format, LabeledSplit, LoadOptions, SplitName};
use frameguard::pipeline::{
    analyze_article, analyze_corpus, health_models_from_table, moderate_comment, render_text,
    reply_health_from_table,
};
use frameguard::reformulator::build_generator;
use frameguard::stats::DataTable;
use frameguard::synth::{generate, SynthOptions};
use frameguard::{rebalance, RebalanceOptions};
use frameguard_service::{router, serve, AppState};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Parser)]
#[command(name = "frameguard", version, about = "Frame-aware comment health analysis and moderation")]
struct Cli {
    /// TOML configuration file; environment variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate article and comment files and write a corpus store.
    Ingest {
        #[arg(long)]
        articles: PathBuf,
        #[arg(long)]
        comments: PathBuf,
        #[arg(long, default_value = "jsonl")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
        /// Deepest reply level kept for analysis.
        #[arg(long)]
        max_depth: Option<u32>,
    },
    /// Score a corpus store and run every analysis.
    Analyze {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the plain-text tables here.
        #[arg(long)]
        text: Option<PathBuf>,
    },
    /// Moderate one comment against an article file.
    Moderate {
        #[arg(long)]
        article: PathBuf,
        #[arg(long)]
        comment: String,
    },
    /// Fit the article-frame and frame-condition models to a scored table.
    Rq1 {
        #[arg(long)]
        table: PathBuf,
    },
    /// Fit the mean-reply-health model to a thread table.
    Rq2 {
        #[arg(long)]
        table: PathBuf,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Write a synthetic corpus store with planted health rates.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        articles: usize,
        #[arg(long, default_value_t = 2_000)]
        comments: usize,
        #[arg(long, default_value_t = 0)]
        replies: usize,
        #[arg(long)]
        toxicity: bool,
    },
    /// Filter a labeled split by confidence and undersample the majority class.
    Rebalance {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: Option<&Path>) -> Result<Config, BoxError> {
    let mut cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.apply_process_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn print_json(value: &impl serde::Serialize) -> Result<(), BoxError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), BoxError> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest {
            articles,
            comments,
            format,
            out,
            max_depth,
        } => {
            let mut opts = LoadOptions::default();
            if let Some(d) = max_depth {
                opts.max_depth = d;
            }
            let corpus = load_corpus(&articles, &comments, format, &opts)?;
            save_corpus(&corpus, &out)?;
            println!(
                "{} articles, {} comments ({} beyond depth {}) -> {}",
                corpus.articles.len(),
                corpus.comments.len(),
                corpus.dropped(),
                corpus.max_depth,
                out.display()
            );
        }
        Command::Analyze {
            store,
            report,
            seed,
            text,
        } => {
            let corpus = load_store(&store, &LoadOptions::default())?;
            let mut opts = cfg.analysis.clone();
            if let Some(s) = seed {
                opts.seed = s;
            }
            let result = analyze_corpus(&corpus, &cfg.scorers()?, &opts)?;
            std::fs::write(&report, result.to_json() + "\n")?;
            let rendered = render_text(&result);
            match text {
                Some(p) => std::fs::write(p, rendered)?,
                None => print!("{rendered}"),
            }
        }
        Command::Moderate { article, comment } => {
            let text = std::fs::read_to_string(&article)?;
            let scorers = cfg.scorers()?;
            let analysis = analyze_article(&text, &scorers)?;
            let generator = build_generator(&cfg.generator)?;
            let result = moderate_comment(&analysis, &comment, &scorers, generator.as_ref(), &cfg.prompt)?;
            print_json(&result)?;
        }
        Command::Rq1 { table } => {
            let table = DataTable::from_csv_path(&table)?;
            print_json(&health_models_from_table(&table, &cfg.analysis)?)?;
        }
        Command::Rq2 { table } => {
            let table = DataTable::from_csv_path(&table)?;
            print_json(&reply_health_from_table(&table, &cfg.analysis)?)?;
        }
        Command::Serve {
            port,
            store,
            report,
            static_dir,
        } => {
            let mut cfg = cfg;
            cfg.port = port.unwrap_or(cfg.port);
            cfg.store = store.or(cfg.store);
            cfg.report = report.or(cfg.report);
            cfg.static_dir = static_dir.or(cfg.static_dir);
            let state = AppState::from_config(&cfg)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", cfg.port)).await?;
                tracing::info!("listening on {}", listener.local_addr()?);
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                serve(listener, router(state), shutdown).await
            })?;
        }
        Command::Synth {
            out,
            seed,
            articles,
            comments,
            replies,
            toxicity,
        } => {
            let synth = generate(&SynthOptions {
                seed,
                n_articles: articles,
                n_comments: comments,
                replies_per_comment: replies,
                toxicity,
                ..SynthOptions::default()
            });
            save_corpus(&synth.corpus, &out)?;
            println!(
                "{} articles, {} comments -> {}",
                synth.corpus.articles.len(),
                synth.corpus.comments.len(),
                out.display()
            );
        }
        Command::Rebalance {
            input,
            out,
            split,
            threshold,
            ratio,
            seed,
        } => {
            let name: SplitName = serde_json::from_value(serde_json::Value::String(split.to_lowercase()))
                .map_err(|_| format!("unknown split `{split}` (expected train, val or test)"))?;
            let split = LabeledSplit::from_jsonl(name, BufReader::new(File::open(&input)?))?;
            let before = split.counts();
            let result = rebalance(
                &split,
                &RebalanceOptions {
                    conf_threshold: threshold,
                    majority_ratio: ratio,
                    seed,
                },
            )?;
            let mut w = BufWriter::new(File::create(&out)?);
            for r in &result.split.records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
            let after = result.split.counts();
            println!(
                "healthy {} -> {}, unhealthy {} -> {} -> {}",
                before.healthy,
                after.healthy,
                before.unhealthy,
                after.unhealthy,
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
