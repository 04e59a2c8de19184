//! Articles, threaded comments and labeled health splits.
//!
//! Loading is strict about shape and lenient about references: a record
//! with a missing field or an out-of-range value aborts the load with its
//! line number, while a record whose thread links do not resolve is dropped
//! and reported as a [`Diagnostic`]. Drops cascade to descendants.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

pub const ARTICLES_FILE: &str = "articles.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";
pub const DEFAULT_MAX_DEPTH: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Schema {
        file: String,
        line: usize,
        message: String,
    },
    #[error("unknown input format `{0}` (expected jsonl or csv)")]
    UnknownFormat(String),
    #[error("no {0} records with confidence at or above the threshold")]
    EmptyClass(&'static str),
    #[error("invalid rebalance option: {0}")]
    InvalidOption(String),
    #[error("no health value for comment `{0}`")]
    MissingHealth(String),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outlet {
    #[serde(rename = "NYT", alias = "nyt")]
    Nyt,
    #[serde(rename = "SOCC", alias = "socc")]
    Socc,
    #[serde(rename = "OTHER", alias = "other", alias = "Other")]
    Other,
}

impl Outlet {
    pub fn as_str(self) -> &'static str {
        match self {
            Outlet::Nyt => "NYT",
            Outlet::Socc => "SOCC",
            Outlet::Other => "OTHER",
        }
    }
}

impl fmt::Display for Outlet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outlet {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NYT" => Ok(Outlet::Nyt),
            "SOCC" => Ok(Outlet::Socc),
            "OTHER" => Ok(Outlet::Other),
            _ => Err(format!("unknown outlet `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub outlet: Outlet,
    pub topic: String,
    pub headline: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_opt_string")]
    pub published: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_opt_string")]
    pub parent_id: Option<String>,
    pub depth: u32,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "de_opt_binary")]
    pub gold_health: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
}

impl Comment {
    pub fn is_top_level(&self) -> bool {
        self.depth == 1
    }
}

fn de_opt_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    let v: Option<String> = Option::deserialize(d)?;
    Ok(v.filter(|s| !s.trim().is_empty()))
}

/// Accepts `true`/`false`, `0`/`1` and their string forms; empty is absent.
fn de_opt_binary<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<bool>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Bool(bool),
        Int(i64),
        Float(f64),
        Text(String),
    }
    let raw: Option<Raw> = Option::deserialize(d)?;
    let invalid = |what: String| serde::de::Error::custom(format!("expected a binary value, got {what}"));
    match raw {
        None => Ok(None),
        Some(Raw::Bool(b)) => Ok(Some(b)),
        Some(Raw::Int(0)) => Ok(Some(false)),
        Some(Raw::Int(1)) => Ok(Some(true)),
        Some(Raw::Int(i)) => Err(invalid(i.to_string())),
        Some(Raw::Float(f)) if f == 0.0 => Ok(Some(false)),
        Some(Raw::Float(f)) if f == 1.0 => Ok(Some(true)),
        Some(Raw::Float(f)) => Err(invalid(f.to_string())),
        Some(Raw::Text(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "" => Ok(None),
            "1" | "true" => Ok(Some(true)),
            "0" | "false" => Ok(Some(false)),
            other => Err(invalid(format!("`{other}`"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    DuplicateArticle,
    DuplicateComment,
    DanglingArticle,
    DanglingParent,
    CrossArticleParent,
    DepthMismatch,
    ParentDropped,
    EmptyBody,
}

/// Why a record was dropped during loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub file: String,
    /// 1-based line (JSONL) or record number (CSV), when known.
    pub line: Option<usize>,
    pub record_id: String,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {} ({})", self.file, line, self.message, self.record_id),
            None => write!(f, "{}: {} ({})", self.file, self.message, self.record_id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            _ => Err(CorpusError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub max_depth: u32,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// A validated, immutable collection of articles and their comment threads.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub articles: Vec<Article>,
    pub comments: Vec<Comment>,
    /// Article id to the ids of its comments, in input order.
    pub index: BTreeMap<String, Vec<String>>,
    pub max_depth: u32,
    /// Comments kept in the corpus but deeper than `max_depth`.
    pub flagged: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    article_pos: HashMap<String, usize>,
    comment_pos: HashMap<String, usize>,
    children: HashMap<String, Vec<String>>,
}

impl Corpus {
    /// Validates thread structure and builds the lookup indexes. Record
    /// positions in diagnostics are 1-based indexes into the inputs.
    pub fn from_records(articles: Vec<Article>, comments: Vec<Comment>, opts: &LoadOptions) -> Corpus {
        let article_lines: Vec<Option<usize>> = (1..=articles.len()).map(Some).collect();
        let comment_lines: Vec<Option<usize>> = (1..=comments.len()).map(Some).collect();
        Self::validate(articles, article_lines, comments, comment_lines, opts)
    }

    fn validate(
        articles: Vec<Article>,
        article_lines: Vec<Option<usize>>,
        comments: Vec<Comment>,
        comment_lines: Vec<Option<usize>>,
        opts: &LoadOptions,
    ) -> Corpus {
        let mut diagnostics = Vec::new();
        let mut kept_articles = Vec::new();
        let mut seen = HashSet::new();
        for (a, line) in articles.into_iter().zip(article_lines) {
            if !seen.insert(a.id.clone()) {
                diagnostics.push(Diagnostic {
                    file: ARTICLES_FILE.into(),
                    line,
                    record_id: a.id.clone(),
                    kind: DiagnosticKind::DuplicateArticle,
                    message: "duplicate article id; later record dropped".into(),
                });
                continue;
            }
            kept_articles.push(a);
        }

        // Parents are resolved before children regardless of file order, so
        // accepted comments are decided depth by depth.
        let mut order: Vec<usize> = (0..comments.len()).collect();
        order.sort_by_key(|&i| comments[i].depth);
        let mut accepted: HashMap<&str, &Comment> = HashMap::new();
        let mut keep = vec![false; comments.len()];
        let mut comment_ids = HashSet::new();
        for &i in &order {
            let c = &comments[i];
            let mut reject = |kind, message: String| {
                diagnostics.push(Diagnostic {
                    file: COMMENTS_FILE.into(),
                    line: comment_lines[i],
                    record_id: c.id.clone(),
                    kind,
                    message,
                });
            };
            if !comment_ids.insert(c.id.as_str()) {
                reject(DiagnosticKind::DuplicateComment, "duplicate comment id; record dropped".into());
                continue;
            }
            if c.body.trim().is_empty() {
                reject(DiagnosticKind::EmptyBody, "empty comment body".into());
                continue;
            }
            if !seen.contains(&c.article_id) {
                reject(
                    DiagnosticKind::DanglingArticle,
                    format!("article `{}` not found", c.article_id),
                );
                continue;
            }
            match (&c.parent_id, c.depth) {
                (None, 1) => {}
                (None, d) => {
                    reject(
                        DiagnosticKind::DepthMismatch,
                        format!("depth {d} requires a parent_id"),
                    );
                    continue;
                }
                (Some(_), 0 | 1) => {
                    reject(
                        DiagnosticKind::DepthMismatch,
                        format!("depth {} cannot have a parent_id", c.depth),
                    );
                    continue;
                }
                (Some(pid), d) => match accepted.get(pid.as_str()) {
                    Some(parent) if parent.article_id != c.article_id => {
                        reject(
                            DiagnosticKind::CrossArticleParent,
                            format!("parent `{pid}` belongs to article `{}`", parent.article_id),
                        );
                        continue;
                    }
                    Some(parent) if parent.depth + 1 != d => {
                        reject(
                            DiagnosticKind::DepthMismatch,
                            format!("depth {d} but parent `{pid}` has depth {}", parent.depth),
                        );
                        continue;
                    }
                    Some(_) => {}
                    None => {
                        let known = comments.iter().any(|o| &o.id == pid);
                        if known {
                            reject(
                                DiagnosticKind::ParentDropped,
                                format!("parent `{pid}` was dropped"),
                            );
                        } else {
                            reject(DiagnosticKind::DanglingParent, format!("parent `{pid}` not found"));
                        }
                        continue;
                    }
                },
            }
            if c.depth == 0 {
                reject(DiagnosticKind::DepthMismatch, "depth must be at least 1".into());
                continue;
            }
            accepted.insert(c.id.as_str(), c);
            keep[i] = true;
        }
        diagnostics.sort_by_key(|d| (d.file.clone(), d.line));

        let kept_comments: Vec<Comment> = comments
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect();
        Self::assemble(kept_articles, kept_comments, opts.max_depth, diagnostics)
    }

    fn assemble(articles: Vec<Article>, comments: Vec<Comment>, max_depth: u32, diagnostics: Vec<Diagnostic>) -> Corpus {
        let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for a in &articles {
            index.entry(a.id.clone()).or_default();
        }
        let mut children: HashMap<String, Vec<String>> = HashMap::new();
        let mut flagged = Vec::new();
        for c in &comments {
            index.entry(c.article_id.clone()).or_default().push(c.id.clone());
            if let Some(p) = &c.parent_id {
                children.entry(p.clone()).or_default().push(c.id.clone());
            }
            if c.depth > max_depth {
                flagged.push(c.id.clone());
            }
        }
        let article_pos = articles.iter().enumerate().map(|(i, a)| (a.id.clone(), i)).collect();
        let comment_pos = comments.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();
        Corpus {
            articles,
            comments,
            index,
            max_depth,
            flagged,
            diagnostics,
            article_pos,
            comment_pos,
            children,
        }
    }

    pub fn article(&self, id: &str) -> Option<&Article> {
        self.article_pos.get(id).map(|&i| &self.articles[i])
    }

    pub fn comment(&self, id: &str) -> Option<&Comment> {
        self.comment_pos.get(id).map(|&i| &self.comments[i])
    }

    pub fn comments_of(&self, article_id: &str) -> impl Iterator<Item = &Comment> {
        self.index
            .get(article_id)
            .into_iter()
            .flatten()
            .filter_map(|id| self.comment(id))
    }

    /// Direct replies of a comment, in input order.
    pub fn replies_of(&self, comment_id: &str) -> impl Iterator<Item = &Comment> {
        self.children
            .get(comment_id)
            .into_iter()
            .flatten()
            .filter_map(|id| self.comment(id))
    }

    pub fn top_level(&self) -> impl Iterator<Item = &Comment> {
        self.comments.iter().filter(|c| c.is_top_level())
    }

    /// False for comments flagged as deeper than the configured maximum.
    pub fn within_depth(&self, c: &Comment) -> bool {
        c.depth <= self.max_depth
    }

    /// Number of records dropped during validation.
    pub fn dropped(&self) -> usize {
        self.diagnostics.len()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn check_article(a: &Article, file: &str, line: usize) -> Result<()> {
    if a.body.trim().is_empty() {
        return Err(CorpusError::Schema {
            file: file.into(),
            line,
            message: format!("article `{}` has an empty body", a.id),
        });
    }
    if a.id.trim().is_empty() {
        return Err(CorpusError::Schema {
            file: file.into(),
            line,
            message: "empty article id".into(),
        });
    }
    Ok(())
}

fn check_comment(c: &Comment, file: &str, line: usize) -> Result<()> {
    let schema = |message: String| CorpusError::Schema {
        file: file.into(),
        line,
        message,
    };
    if c.id.trim().is_empty() {
        return Err(schema("empty comment id".into()));
    }
    for (name, v) in [("gold_confidence", c.gold_confidence), ("toxicity", c.toxicity)] {
        if let Some(v) = v {
            if !(0.0..=1.0).contains(&v) {
                return Err(schema(format!("{name} {v} outside [0, 1]")));
            }
        }
    }
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(
    reader: impl BufRead,
    file: &str,
    check: impl Fn(&T, &str, usize) -> Result<()>,
) -> Result<(Vec<T>, Vec<Option<usize>>)> {
    let mut out = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: PathBuf::from(file),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| CorpusError::Schema {
            file: file.into(),
            line: line_no,
            message: e.to_string(),
        })?;
        check(&rec, file, line_no)?;
        out.push(rec);
        lines.push(Some(line_no));
    }
    Ok((out, lines))
}

fn read_csv<T: for<'de> Deserialize<'de>>(
    reader: impl Read,
    file: &str,
    check: impl Fn(&T, &str, usize) -> Result<()>,
) -> Result<(Vec<T>, Vec<Option<usize>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::Headers).from_reader(reader);
    let mut out = Vec::new();
    let mut lines = Vec::new();
    for (i, rec) in rdr.deserialize::<T>().enumerate() {
        // Header is line 1.
        let line_no = i + 2;
        let rec = rec.map_err(|e| CorpusError::Schema {
            file: file.into(),
            line: e.position().map_or(line_no, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        check(&rec, file, line_no)?;
        out.push(rec);
        lines.push(Some(line_no));
    }
    Ok((out, lines))
}

/// Reads articles and comments from readers in the given format.
pub fn load_corpus_from_readers(
    articles: impl Read,
    comments: impl Read,
    format: Format,
    opts: &LoadOptions,
) -> Result<Corpus> {
    let (arts, art_lines, coms, com_lines) = match format {
        Format::Jsonl => {
            let (a, al) = read_jsonl(BufReader::new(articles), ARTICLES_FILE, check_article)?;
            let (c, cl) = read_jsonl(BufReader::new(comments), COMMENTS_FILE, check_comment)?;
            (a, al, c, cl)
        }
        Format::Csv => {
            let (a, al) = read_csv(articles, "articles.csv", check_article)?;
            let (c, cl) = read_csv(comments, "comments.csv", check_comment)?;
            (a, al, c, cl)
        }
    };
    Ok(Corpus::validate(arts, art_lines, coms, com_lines, opts))
}

pub fn load_corpus(articles: &Path, comments: &Path, format: Format, opts: &LoadOptions) -> Result<Corpus> {
    let a = File::open(articles).map_err(io_err(articles))?;
    let c = File::open(comments).map_err(io_err(comments))?;
    load_corpus_from_readers(a, c, format, opts)
}

/// Loads a store directory written by [`save_corpus`].
pub fn load_store(dir: &Path, opts: &LoadOptions) -> Result<Corpus> {
    load_corpus(&dir.join(ARTICLES_FILE), &dir.join(COMMENTS_FILE), Format::Jsonl, opts)
}

/// Writes the corpus as a JSONL store directory.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_jsonl(&dir.join(ARTICLES_FILE), &corpus.articles)?;
    write_jsonl(&dir.join(COMMENTS_FILE), &corpus.comments)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| CorpusError::Serialize(e.to_string()))?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

// ---------------------------------------------------------------------------
// Labeled splits and rebalancing

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub text: String,
    /// True for healthy.
    #[serde(deserialize_with = "de_binary")]
    pub label: bool,
    pub confidence: f64,
}

fn de_binary<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    de_opt_binary(d)?.ok_or_else(|| serde::de::Error::custom("missing label"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSplit {
    pub name: SplitName,
    pub records: Vec<LabeledRecord>,
}

impl LabeledSplit {
    pub fn counts(&self) -> ClassCounts {
        let healthy = self.records.iter().filter(|r| r.label).count();
        ClassCounts {
            healthy,
            unhealthy: self.records.len() - healthy,
        }
    }

    /// Reads `{text, label, confidence}` lines.
    pub fn from_jsonl(name: SplitName, reader: impl BufRead) -> Result<Self> {
        let check = |r: &LabeledRecord, file: &str, line: usize| {
            if (0.0..=1.0).contains(&r.confidence) {
                Ok(())
            } else {
                Err(CorpusError::Schema {
                    file: file.into(),
                    line,
                    message: format!("confidence {} outside [0, 1]", r.confidence),
                })
            }
        };
        let (records, _) = read_jsonl(reader, "split", check)?;
        Ok(Self { name, records })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub healthy: usize,
    pub unhealthy: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RebalanceOptions {
    pub conf_threshold: f64,
    pub majority_ratio: f64,
    pub seed: u64,
}

impl Default for RebalanceOptions {
    fn default() -> Self {
        Self {
            conf_threshold: 0.8,
            majority_ratio: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rebalanced {
    pub split: LabeledSplit,
    pub seed: u64,
    /// Label of the smaller class after filtering (true = healthy).
    pub minority_label: bool,
    pub below_threshold: usize,
    pub majority_available: usize,
}

/// Keeps every confident minority record and a seeded uniform subsample of
/// at most `majority_ratio` times as many confident majority records.
///
/// The minority class is whichever class is smaller after filtering
/// (unhealthy on a tie). Output records keep their input order, and a
/// majority class already within the ratio is kept whole, which makes the
/// operation idempotent.
pub fn rebalance(split: &LabeledSplit, opts: &RebalanceOptions) -> Result<Rebalanced> {
    if !(0.0..=1.0).contains(&opts.conf_threshold) {
        return Err(CorpusError::InvalidOption(format!(
            "conf_threshold {} outside [0, 1]",
            opts.conf_threshold
        )));
    }
    if !(opts.majority_ratio >= 1.0) {
        return Err(CorpusError::InvalidOption(format!(
            "majority_ratio {} below 1",
            opts.majority_ratio
        )));
    }
    let confident: Vec<usize> = (0..split.records.len())
        .filter(|&i| split.records[i].confidence >= opts.conf_threshold)
        .collect();
    let below_threshold = split.records.len() - confident.len();
    let (healthy, unhealthy): (Vec<usize>, Vec<usize>) =
        confident.iter().partition(|&&i| split.records[i].label);
    if healthy.is_empty() {
        return Err(CorpusError::EmptyClass("healthy"));
    }
    if unhealthy.is_empty() {
        return Err(CorpusError::EmptyClass("unhealthy"));
    }
    let minority_label = healthy.len() < unhealthy.len();
    let (minority, majority) = if minority_label {
        (healthy, unhealthy)
    } else {
        (unhealthy, healthy)
    };
    let cap = (opts.majority_ratio * minority.len() as f64).floor() as usize;
    let majority_available = majority.len();
    let kept_majority: Vec<usize> = if majority.len() <= cap {
        majority
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, majority.len(), cap)
            .into_iter()
            .map(|k| majority[k])
            .collect();
        picked.sort_unstable();
        picked
    };
    let mut keep: Vec<usize> = minority.into_iter().chain(kept_majority).collect();
    keep.sort_unstable();
    Ok(Rebalanced {
        split: LabeledSplit {
            name: split.name,
            records: keep.into_iter().map(|i| split.records[i].clone()).collect(),
        },
        seed: opts.seed,
        minority_label,
        below_threshold,
        majority_available,
    })
}

// ---------------------------------------------------------------------------
// Health proportions

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub healthy: usize,
    pub total: usize,
    pub proportion: f64,
}

impl Proportion {
    pub(crate) fn add(&mut self, healthy: bool) {
        self.total += 1;
        self.healthy += usize::from(healthy);
        self.proportion = self.healthy as f64 / self.total as f64;
    }
}

impl Default for Proportion {
    fn default() -> Self {
        Self {
            healthy: 0,
            total: 0,
            proportion: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub overall: Proportion,
    pub by_topic: BTreeMap<String, Proportion>,
    pub by_outlet: BTreeMap<String, Proportion>,
    pub by_outlet_topic: BTreeMap<String, BTreeMap<String, Proportion>>,
}

/// Healthy-comment proportions overall, per topic, per outlet and per
/// outlet and topic. Topics without comments are absent.
pub fn corpus_stats(corpus: &Corpus, health: &HashMap<String, bool>) -> Result<CorpusStats> {
    let mut stats = CorpusStats {
        overall: Proportion::default(),
        by_topic: BTreeMap::new(),
        by_outlet: BTreeMap::new(),
        by_outlet_topic: BTreeMap::new(),
    };
    for c in &corpus.comments {
        let h = *health
            .get(&c.id)
            .ok_or_else(|| CorpusError::MissingHealth(c.id.clone()))?;
        let article = corpus.article(&c.article_id).expect("validated reference");
        stats.overall.add(h);
        stats.by_topic.entry(article.topic.clone()).or_default().add(h);
        stats.by_outlet.entry(article.outlet.to_string()).or_default().add(h);
        stats
            .by_outlet_topic
            .entry(article.outlet.to_string())
            .or_default()
            .entry(article.topic.clone())
            .or_default()
            .add(h);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARTICLES: &str = r#"{"id":"a1","outlet":"NYT","topic":"Healthcare","headline":"H1","body":"Body one."}
{"id":"a2","outlet":"SOCC","topic":"Trump","headline":"H2","body":"Body two.","published":"2016-03-01"}
"#;

    fn load(comments: &str) -> Corpus {
        load_corpus_from_readers(ARTICLES.as_bytes(), comments.as_bytes(), Format::Jsonl, &LoadOptions::default())
            .unwrap()
    }

    #[test]
    fn small_fixture_builds_index() {
        let c = load(
            r#"{"id":"c1","article_id":"a1","depth":1,"body":"x"}
{"id":"c2","article_id":"a1","parent_id":"c1","depth":2,"body":"y","gold_health":1}
{"id":"c3","article_id":"a2","depth":1,"body":"z","gold_health":false,"toxicity":0.2}
"#,
        );
        assert_eq!(c.index["a1"], vec!["c1", "c2"]);
        assert_eq!(c.index["a2"], vec!["c3"]);
        assert!(c.diagnostics.is_empty());
        assert_eq!(c.comment("c2").unwrap().gold_health, Some(true));
        assert_eq!(c.replies_of("c1").count(), 1);
    }

    #[test]
    fn cross_article_parent_is_dropped() {
        let c = load(
            r#"{"id":"c1","article_id":"a1","depth":1,"body":"x"}
{"id":"c3","article_id":"a2","parent_id":"c1","depth":2,"body":"z"}
"#,
        );
        assert_eq!(c.comments.len(), 1);
        assert_eq!(c.diagnostics[0].kind, DiagnosticKind::CrossArticleParent);
        assert_eq!(c.diagnostics[0].line, Some(2));
    }

    #[test]
    fn drops_cascade_to_replies() {
        let c = load(
            r#"{"id":"r2","article_id":"a1","parent_id":"r1","depth":3,"body":"deeper"}
{"id":"r1","article_id":"a1","parent_id":"ghost","depth":2,"body":"reply"}
"#,
        );
        assert!(c.comments.is_empty());
        let kinds: Vec<_> = c.diagnostics.iter().map(|d| d.kind).collect();
        assert_eq!(kinds, vec![DiagnosticKind::ParentDropped, DiagnosticKind::DanglingParent]);
    }

    #[test]
    fn parents_may_follow_children_in_the_file() {
        let c = load(
            r#"{"id":"c2","article_id":"a1","parent_id":"c1","depth":2,"body":"y"}
{"id":"c1","article_id":"a1","depth":1,"body":"x"}
"#,
        );
        assert_eq!(c.comments.len(), 2);
        assert_eq!(c.index["a1"], vec!["c2", "c1"]);
    }

    #[test]
    fn deep_comments_are_flagged_not_deleted() {
        let c = load(
            r#"{"id":"c1","article_id":"a1","depth":1,"body":"x"}
{"id":"c2","article_id":"a1","parent_id":"c1","depth":2,"body":"y"}
{"id":"c3","article_id":"a1","parent_id":"c2","depth":3,"body":"z"}
"#,
        );
        assert_eq!(c.comments.len(), 3);
        assert_eq!(c.flagged, vec!["c3"]);
        assert!(!c.within_depth(c.comment("c3").unwrap()));
    }

    #[test]
    fn depth_and_parent_must_agree() {
        let c = load(
            r#"{"id":"c1","article_id":"a1","depth":2,"body":"x"}
{"id":"c2","article_id":"a1","parent_id":"c9","depth":1,"body":"y"}
"#,
        );
        assert!(c.comments.is_empty());
        assert!(c.diagnostics.iter().all(|d| d.kind == DiagnosticKind::DepthMismatch));
    }

    #[test]
    fn missing_field_is_a_schema_error_with_line() {
        let err = load_corpus_from_readers(
            ARTICLES.as_bytes(),
            "{\"id\":\"c1\",\"article_id\":\"a1\",\"depth\":1,\"body\":\"x\"}\n{\"id\":\"c2\",\"depth\":1,\"body\":\"y\"}\n"
                .as_bytes(),
            Format::Jsonl,
            &LoadOptions::default(),
        )
        .unwrap_err();
        match err {
            CorpusError::Schema { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("article_id"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_article_body_is_rejected() {
        let err = load_corpus_from_readers(
            r#"{"id":"a1","outlet":"NYT","topic":"t","headline":"h","body":"  "}"#.as_bytes(),
            "".as_bytes(),
            Format::Jsonl,
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Schema { line: 1, .. }));
    }

    #[test]
    fn csv_uses_the_same_columns() {
        let arts = "id,outlet,topic,headline,body,published\na1,NYT,Healthcare,H,Body.,\n";
        let coms = "id,article_id,parent_id,depth,body,gold_health,gold_confidence,toxicity\n\
                    c1,a1,,1,hello,1,0.9,\nc2,a1,c1,2,reply,0,,0.7\n";
        let c = load_corpus_from_readers(arts.as_bytes(), coms.as_bytes(), Format::Csv, &LoadOptions::default())
            .unwrap();
        assert_eq!(c.comments.len(), 2);
        assert_eq!(c.comments[0].parent_id, None);
        assert_eq!(c.comments[0].gold_confidence, Some(0.9));
        assert_eq!(c.comments[1].gold_health, Some(false));
        assert_eq!(c.comments[1].toxicity, Some(0.7));
        assert_eq!(c.articles[0].published, None);
    }

    fn record(label: bool, confidence: f64) -> LabeledRecord {
        LabeledRecord {
            text: String::new(),
            label,
            confidence,
        }
    }

    #[test]
    fn rebalance_small_synthetic() {
        // 100 healthy (60 confident) and 20 unhealthy (15 confident).
        let mut records = Vec::new();
        for i in 0..100 {
            records.push(record(true, if i < 60 { 0.9 } else { 0.5 }));
        }
        for i in 0..20 {
            records.push(record(false, if i < 15 { 0.85 } else { 0.6 }));
        }
        let split = LabeledSplit {
            name: SplitName::Train,
            records,
        };
        let out = rebalance(&split, &RebalanceOptions::default()).unwrap();
        let counts = out.split.counts();
        assert_eq!((counts.healthy, counts.unhealthy), (30, 15));
        assert!(!out.minority_label);
        assert_eq!(out.below_threshold, 45);
    }

    #[test]
    fn rebalance_rejects_empty_minority() {
        let split = LabeledSplit {
            name: SplitName::Val,
            records: vec![record(true, 0.9), record(false, 0.3)],
        };
        assert!(matches!(
            rebalance(&split, &RebalanceOptions::default()),
            Err(CorpusError::EmptyClass("unhealthy"))
        ));
    }

    #[test]
    fn proportions_by_topic() {
        let c = load(
            r#"{"id":"c1","article_id":"a1","depth":1,"body":"x"}
{"id":"c2","article_id":"a1","depth":1,"body":"y"}
{"id":"c3","article_id":"a1","depth":1,"body":"z"}
{"id":"c4","article_id":"a1","depth":1,"body":"w"}
"#,
        );
        let health: HashMap<String, bool> = [("c1", true), ("c2", true), ("c3", false), ("c4", false)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let s = corpus_stats(&c, &health).unwrap();
        assert_eq!(s.by_topic["Healthcare"].proportion, 0.5);
        assert!(!s.by_topic.contains_key("Trump"));
        let mut partial = health.clone();
        partial.remove("c4");
        assert!(matches!(corpus_stats(&c, &partial), Err(CorpusError::MissingHealth(_))));
    }
}
