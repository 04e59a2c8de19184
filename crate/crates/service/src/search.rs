//! Keyword search over the mounted corpus.
//!
//! Articles are ranked by the summed frequency of the query terms in the
//! lowercased headline and body. Ties go to the smaller article id.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use frameguard::corpus::{Article, Corpus, Outlet};

/// Results returned per query.
pub const SEARCH_LIMIT: usize = 3;
const SNIPPET_CHARS: usize = 240;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleSummary {
    pub id: String,
    pub outlet: Outlet,
    pub topic: String,
    pub headline: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<String>,
    pub snippet: String,
    /// Summed term frequency of the query terms.
    pub score: u32,
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

struct Entry {
    summary: ArticleSummary,
    counts: HashMap<String, u32>,
}

/// Per-article term counts built once when the corpus is mounted.
pub struct SearchIndex {
    entries: Vec<Entry>,
}

fn summarize(a: &Article) -> ArticleSummary {
    ArticleSummary {
        id: a.id.clone(),
        outlet: a.outlet,
        topic: a.topic.clone(),
        headline: a.headline.clone(),
        published: a.published.clone(),
        snippet: a.body.chars().take(SNIPPET_CHARS).collect(),
        score: 0,
    }
}

impl SearchIndex {
    pub fn new(corpus: &Corpus) -> Self {
        let entries = corpus
            .articles
            .iter()
            .map(|a| {
                let mut counts = HashMap::new();
                for t in tokenize(&a.headline).chain(tokenize(&a.body)) {
                    *counts.entry(t).or_insert(0) += 1;
                }
                Entry {
                    summary: summarize(a),
                    counts,
                }
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Top matches with a positive score. Repeated query terms count once.
    pub fn search(&self, query: &str, limit: usize) -> Vec<ArticleSummary> {
        let terms: BTreeSet<String> = tokenize(query).collect();
        if terms.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<ArticleSummary> = self
            .entries
            .iter()
            .filter_map(|e| {
                let score: u32 = terms.iter().filter_map(|t| e.counts.get(t)).sum();
                (score > 0).then(|| ArticleSummary {
                    score,
                    ..e.summary.clone()
                })
            })
            .collect();
        hits.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        hits.truncate(limit);
        hits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use frameguard::corpus::LoadOptions;

    fn article(id: &str, headline: &str, body: &str) -> Article {
        Article {
            id: id.into(),
            outlet: Outlet::Nyt,
            topic: "Climate".into(),
            headline: headline.into(),
            body: body.into(),
            published: None,
        }
    }

    fn index(articles: Vec<Article>) -> SearchIndex {
        SearchIndex::new(&Corpus::from_records(articles, vec![], &LoadOptions::default()))
    }

    #[test]
    fn tokenizer_lowercases_and_splits() {
        let t: Vec<String> = tokenize("Climate-change, CLIMATE!").collect();
        assert_eq!(t, ["climate", "change", "climate"]);
    }

    #[test]
    fn ranking_and_ties() {
        let idx = index(vec![
            article("b", "Tax cuts", "tax tax"),
            article("a", "Tax plan", "tax tax"),
            article("c", "Weather", "sunny"),
            article("d", "Taxes", "a tax"),
            article("e", "Tax", "tax tax tax tax"),
        ]);
        let ids: Vec<String> = idx.search("TAX", 3).into_iter().map(|s| s.id).collect();
        assert_eq!(ids, ["e", "a", "b"]);
        assert!(idx.search("volcano", 3).is_empty());
        assert!(idx.search("  ", 3).is_empty());
        assert_eq!(idx.search("tax tax", 5)[0].score, 5);
    }
}
