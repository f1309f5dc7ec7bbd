//! Search queries built from question/answer pairs, search providers with
//! recorded fixtures, source typing and relevance filtering.
//!
//! Entities are maximal runs of capitalized word tokens. A run that starts
//! a sentence or a `;`-separated clause loses its first token when that
//! token is a known lowercase word ("Visit", "Thanks"). Month and weekday
//! names and runs made only of stopwords are not entities.
//!
//! A query is the entity phrases (quoted, in order of first mention)
//! followed by the Q+A nouns, verbs and adjectives by descending TF-IDF
//! weight, ties broken alphabetically, cut at ten terms.

mod provider;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};
use crate::textproc::{TextProcessor, TfIdfIndex, TokenKind, TokenizedText};

pub use provider::{
    FixtureProvider, FixtureRecord, LiveConfig, LiveProvider, LocalDocument, LocalIndexProvider,
    RawResult, RecordingProvider, SearchProvider,
};

pub const MAX_QUERY_TERMS: usize = 10;
pub const MIN_QUERY_TERMS: usize = 5;
pub const BACKOFF_FLOOR: usize = 3;
pub const MAX_RETRIES: usize = 5;
pub const RESULTS_WANTED: usize = 10;

const NOT_ENTITIES: [&str; 19] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "monday", "tuesday", "wednesday", "thursday", "friday",
    "saturday", "sunday",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchScope {
    Web,
    ForumOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryOrigin {
    Question,
    Answer,
    QaPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTerm {
    pub text: String,
    pub entity: bool,
    /// TF-IDF weight in the source text; 0 for entities.
    pub weight: f64,
}

impl QueryTerm {
    /// Search-engine form: entities quoted.
    pub fn rendered(&self) -> String {
        if self.entity {
            format!("\"{}\"", self.text)
        } else {
            self.text.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub terms: Vec<QueryTerm>,
    pub origin: QueryOrigin,
}

impl Query {
    pub fn rendered_terms(&self) -> Vec<String> {
        self.terms.iter().map(QueryTerm::rendered).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Individual lowercased words, entity phrases split.
    pub fn words(&self) -> Vec<String> {
        self.terms
            .iter()
            .flat_map(|t| t.text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .collect()
    }

    /// Removes the lowest-weight plain term (the last one among equals);
    /// entities only go once no plain term is left, last mentioned first.
    pub fn drop_weakest(&mut self) -> Option<QueryTerm> {
        let plain = self
            .terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.entity)
            .min_by(|(ia, a), (ib, b)| a.weight.total_cmp(&b.weight).then(ib.cmp(ia)))
            .map(|(i, _)| i);
        let idx = plain.or_else(|| self.terms.len().checked_sub(1))?;
        Some(self.terms.remove(idx))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered_terms().join(" "))
    }
}

fn is_capitalized(surface: &str) -> bool {
    surface.chars().next().is_some_and(char::is_uppercase)
}

/// Entity phrases in order of first mention, without duplicates.
pub fn extract_entities(text: &TokenizedText) -> Vec<String> {
    let processor = TextProcessor::bundled();
    let known = |lower: &str| {
        processor.lexicon().contains(lower)
            || processor.is_stopword(lower)
            || processor.word_class(lower) == crate::textproc::WordClass::Pronoun
    };
    let mut clause_start = vec![false; text.tokens.len()];
    for range in &text.sentences {
        if range.start < clause_start.len() {
            clause_start[range.start] = true;
        }
    }
    for (i, tok) in text.tokens.iter().enumerate() {
        if tok.surface == ";" && i + 1 < clause_start.len() {
            clause_start[i + 1] = true;
        }
    }

    let mut runs: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, tok) in text.tokens.iter().enumerate() {
        let cap = tok.kind == TokenKind::Word
            && is_capitalized(&tok.surface)
            && !NOT_ENTITIES.contains(&tok.lower.as_str());
        if cap && !(clause_start[i] && known(&tok.lower)) {
            current.push(i);
        } else if !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        runs.push(current);
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for run in runs {
        if run.iter().all(|i| processor.is_stopword(&text.tokens[*i].lower)) {
            continue;
        }
        let phrase = run
            .iter()
            .map(|i| text.tokens[*i].surface.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        if seen.insert(phrase.to_lowercase()) {
            out.push(phrase);
        }
    }
    out
}

/// Query from one or two texts (question, answer).
pub fn generate_query(
    texts: &[&TokenizedText],
    origin: QueryOrigin,
    index: &TfIdfIndex,
) -> Result<Query> {
    let mut terms: Vec<QueryTerm> = Vec::new();
    let mut entity_seen = HashSet::new();
    for t in texts {
        for e in extract_entities(t) {
            if entity_seen.insert(e.to_lowercase()) {
                terms.push(QueryTerm {
                    text: e,
                    entity: true,
                    weight: 0.0,
                });
            }
        }
    }
    terms.truncate(MAX_QUERY_TERMS);

    let all_terms: Vec<String> = texts.iter().flat_map(|t| t.terms()).collect();
    let mut pool: Vec<(String, f64)> = Vec::new();
    let mut pool_seen = HashSet::new();
    for t in texts {
        for tok in &t.tokens {
            if tok.kind == TokenKind::Word
                && tok.word_class.is_query_content()
                && !TextProcessor::bundled().is_stopword(&tok.lower)
                && pool_seen.insert(tok.lower.clone())
            {
                let w = index.weight(&tok.lower, &all_terms);
                pool.push((tok.lower.clone(), w));
            }
        }
    }
    pool.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    for (text, weight) in pool {
        if terms.len() >= MAX_QUERY_TERMS {
            break;
        }
        terms.push(QueryTerm {
            text,
            entity: false,
            weight,
        });
    }
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    if terms.len() < BACKOFF_FLOOR {
        log::warn!(
            "query `{}` has only {} term(s)",
            terms.iter().map(QueryTerm::rendered).collect::<Vec<_>>().join(" "),
            terms.len()
        );
    }
    Ok(Query { terms, origin })
}

/// Query made of every distinct content word of a text (no selection).
pub fn whole_text_query(text: &TokenizedText, origin: QueryOrigin) -> Result<Query> {
    let processor = TextProcessor::bundled();
    let mut seen = HashSet::new();
    let terms: Vec<QueryTerm> = text
        .tokens
        .iter()
        .filter(|t| processor.is_content(t) && seen.insert(t.lower.clone()))
        .map(|t| QueryTerm {
            text: t.lower.clone(),
            entity: false,
            weight: 1.0,
        })
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(Query { terms, origin })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceType {
    Reputed,
    Forum,
    Other,
}

impl SourceType {
    pub const ALL: [SourceType; 3] = [SourceType::Reputed, SourceType::Forum, SourceType::Other];

    pub fn key(self) -> &'static str {
        match self {
            SourceType::Reputed => "reputed",
            SourceType::Forum => "forum",
            SourceType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub url: String,
    pub snippet: String,
    pub page_text: Option<String>,
    pub rank: u32,
    pub source_type: SourceType,
    pub relevant: bool,
}

fn parse_suffix_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim().trim_start_matches('.').to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Host of a URL given with or without a scheme.
pub fn url_host(url: &str) -> Option<String> {
    let trimmed = url.trim();
    let parsed = if trimmed.contains("://") {
        Url::parse(trimmed)
    } else {
        Url::parse(&format!("http://{trimmed}"))
    };
    parsed
        .ok()?
        .host_str()
        .map(|h| h.trim_start_matches("www.").to_lowercase())
        .filter(|h| !h.is_empty())
}

fn host_matches(host: &str, suffix: &str) -> bool {
    host == suffix || host.ends_with(&format!(".{suffix}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceClassifier {
    reputed: Vec<String>,
    forum: Vec<String>,
}

impl SourceClassifier {
    pub fn new(reputed: Vec<String>, forum: Vec<String>) -> Self {
        SourceClassifier { reputed, forum }
    }

    pub fn from_lists(reputed: &str, forum: &str) -> Self {
        Self::new(parse_suffix_list(reputed), parse_suffix_list(forum))
    }

    pub fn bundled() -> Self {
        Self::from_lists(
            include_str!("../../data/reputed_domains.txt"),
            include_str!("../../data/forum_domains.txt"),
        )
    }

    /// Reputed list first, then forum list; anything else (including
    /// unparseable URLs) is Other.
    pub fn classify(&self, url: &str) -> SourceType {
        let Some(host) = url_host(url) else {
            return SourceType::Other;
        };
        if self.reputed.iter().any(|s| host_matches(&host, s)) {
            SourceType::Reputed
        } else if self.forum.iter().any(|s| host_matches(&host, s)) {
            SourceType::Forum
        } else {
            SourceType::Other
        }
    }
}

/// Keyword/domain relevance predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceFilter {
    pub keywords: Vec<String>,
    #[serde(default)]
    pub domains: Vec<String>,
}

impl Default for RelevanceFilter {
    fn default() -> Self {
        RelevanceFilter {
            keywords: vec!["qatar".into()],
            domains: Vec::new(),
        }
    }
}

impl RelevanceFilter {
    pub fn is_relevant(&self, url: &str, snippet: &str, page_text: Option<&str>) -> bool {
        let Some(host) = url_host(url) else {
            return false;
        };
        if self.domains.iter().any(|d| host_matches(&host, &d.to_lowercase())) {
            return true;
        }
        let haystacks = [url.to_lowercase(), snippet.to_lowercase(), page_text.unwrap_or("").to_lowercase()];
        self.keywords
            .iter()
            .map(|k| k.to_lowercase())
            .any(|k| haystacks.iter().any(|h| h.contains(&k)))
    }
}

/// Result of a search including the backoff history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub results: Vec<SearchResult>,
    /// Rendered terms of every query sent, in order.
    pub attempts: Vec<Vec<String>>,
}

impl SearchOutcome {
    pub fn relevant(&self) -> impl Iterator<Item = &SearchResult> {
        self.results.iter().filter(|r| r.relevant)
    }
}

/// Runs the query, dropping the weakest term and retrying while fewer than
/// ten results come back, more than three terms remain and fewer than five
/// retries were made.
pub fn search_with_backoff(
    provider: &dyn SearchProvider,
    query: &Query,
    scope: SearchScope,
    classifier: &SourceClassifier,
    filter: &RelevanceFilter,
) -> Result<SearchOutcome> {
    let mut q = query.clone();
    let mut attempts = Vec::new();
    let mut retries = 0;
    let raw = loop {
        let terms = q.rendered_terms();
        let raw = provider.search(&terms, scope).map_err(|e| match e {
            Error::Provider { .. } => e,
            other => Error::Provider {
                query: terms.clone(),
                message: other.to_string(),
            },
        })?;
        attempts.push(terms);
        if raw.len() >= RESULTS_WANTED || q.len() <= BACKOFF_FLOOR || retries >= MAX_RETRIES {
            break raw;
        }
        q.drop_weakest();
        retries += 1;
    };
    let mut raw = raw;
    raw.sort_by_key(|r| r.rank);
    raw.truncate(RESULTS_WANTED);
    let results = raw
        .into_iter()
        .map(|r| SearchResult {
            source_type: classifier.classify(&r.url),
            relevant: filter.is_relevant(&r.url, &r.snippet, r.page_text.as_deref()),
            url: r.url,
            snippet: r.snippet,
            page_text: r.page_text,
            rank: r.rank,
        })
        .collect();
    Ok(SearchOutcome { results, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize;
    use proptest::prelude::*;

    #[test]
    fn entities() {
        assert_eq!(
            extract_entities(&tokenize("Visit Qatar Bowling Center during thursday")),
            vec!["Qatar Bowling Center"]
        );
        assert!(extract_entities(&tokenize("all lowercase words here")).is_empty());
        assert_eq!(extract_entities(&tokenize("we live in Doha now")), vec!["Doha"]);
        let q = tokenize("Hi; Just wanted to confirm Qatar's National Day. Is it 18th of December? Thanks.");
        assert_eq!(extract_entities(&q), vec!["Qatar", "National Day"]);
    }

    #[test]
    fn national_day_query() {
        let q = tokenize("Hi; Just wanted to confirm Qatar's National Day. Is it 18th of December? Thanks.");
        let a = tokenize("yes; it is 18th Dec.");
        let index = crate::textproc::build_index([&q, &a]).unwrap();
        let query = generate_query(&[&q, &a], QueryOrigin::QaPair, &index).unwrap();
        let rendered = query.rendered_terms();
        assert!(rendered.contains(&"\"National Day\"".to_string()));
        assert!(rendered.contains(&"\"Qatar\"".to_string()));
        assert!(rendered.len() >= 5 && rendered.len() <= 10, "{rendered:?}");
        for w in ["confirm", "wanted", "national", "day", "december"] {
            assert!(rendered.contains(&w.to_string()), "{w} missing from {rendered:?}");
        }
    }

    #[test]
    fn degenerate_query() {
        let q = tokenize("visa");
        let a = tokenize("");
        let index = crate::textproc::build_index([&q]).unwrap();
        let query = generate_query(&[&q, &a], QueryOrigin::QaPair, &index).unwrap();
        assert_eq!(query.rendered_terms(), vec!["visa"]);
        let none = tokenize("the of and");
        assert!(matches!(
            generate_query(&[&none], QueryOrigin::Question, &index),
            Err(Error::EmptyQuery)
        ));
    }

    #[test]
    fn duplicate_terms_appear_once() {
        let q = tokenize("where to renew visa");
        let a = tokenize("renew visa online");
        let index = crate::textproc::build_index([&q, &a]).unwrap();
        let query = generate_query(&[&q, &a], QueryOrigin::QaPair, &index).unwrap();
        let terms = query.rendered_terms();
        assert_eq!(terms.iter().filter(|t| *t == "visa").count(), 1);
        assert_eq!(terms.iter().filter(|t| *t == "renew").count(), 1);
    }

    #[test]
    fn source_types() {
        let c = SourceClassifier::bundled();
        assert_eq!(c.classify("dohanews.co"), SourceType::Reputed);
        assert_eq!(c.classify("https://www.dohanews.co/a/b"), SourceType::Reputed);
        assert_eq!(c.classify("iloveqatar.net"), SourceType::Forum);
        assert_eq!(c.classify("qppstudio.net"), SourceType::Other);
        assert_eq!(c.classify("http://"), SourceType::Other);
        assert_eq!(c.classify("notdohanews.co"), SourceType::Other);
        assert_eq!(c.classify("http://edition.cnn.com/x"), SourceType::Reputed);
    }

    #[test]
    fn relevance() {
        let f = RelevanceFilter::default();
        assert!(!f.is_relevant(
            "qppstudio.net",
            "Public holidays and national ... the world's source of Public holidays information",
            None
        ));
        assert!(f.is_relevant("iloveqatar.net", "anything", None));
        assert!(f.is_relevant("example.com", "Qatar National Day", None));
        assert!(!f.is_relevant("::::", "qatar", None));
    }

    fn query_of(plain: &[(&str, f64)], entities: &[&str]) -> Query {
        let mut terms: Vec<QueryTerm> = entities
            .iter()
            .map(|e| QueryTerm {
                text: e.to_string(),
                entity: true,
                weight: 0.0,
            })
            .collect();
        terms.extend(plain.iter().map(|(t, w)| QueryTerm {
            text: t.to_string(),
            entity: false,
            weight: *w,
        }));
        Query {
            terms,
            origin: QueryOrigin::QaPair,
        }
    }

    fn results(n: usize) -> Vec<RawResult> {
        (0..n)
            .map(|i| RawResult {
                url: format!("http://example.com/{i}"),
                snippet: "qatar".into(),
                page_text: None,
                rank: i as u32 + 1,
            })
            .collect()
    }

    #[test]
    fn no_backoff_with_ten_results() {
        let q = query_of(&[("visa", 2.0), ("renew", 1.0), ("office", 0.5), ("fee", 0.1)], &[]);
        let mut fixture = FixtureProvider::default();
        fixture.insert(q.rendered_terms(), SearchScope::Web, results(12));
        let out = search_with_backoff(
            &fixture,
            &q,
            SearchScope::Web,
            &SourceClassifier::bundled(),
            &RelevanceFilter::default(),
        )
        .unwrap();
        assert_eq!(out.attempts.len(), 1);
        assert_eq!(out.results.len(), 10);
    }

    #[test]
    fn scripted_backoff_sequence() {
        let q = query_of(
            &[("visa", 5.0), ("renew", 4.0), ("office", 3.0), ("fee", 2.0), ("form", 1.0)],
            &["Doha"],
        );
        let mut fixture = FixtureProvider::default();
        let mut expected = Vec::new();
        let mut cur = q.clone();
        loop {
            let terms = cur.rendered_terms();
            let n = if cur.len() == 4 { 10 } else { 2 };
            fixture.insert(terms.clone(), SearchScope::Web, results(n));
            expected.push(terms);
            if cur.len() == 4 {
                break;
            }
            cur.drop_weakest();
        }
        let out = search_with_backoff(
            &fixture,
            &q,
            SearchScope::Web,
            &SourceClassifier::bundled(),
            &RelevanceFilter::default(),
        )
        .unwrap();
        assert_eq!(out.attempts, expected);
        assert_eq!(
            out.attempts.last().unwrap(),
            &vec!["\"Doha\"".to_string(), "visa".into(), "renew".into(), "office".into()]
        );
        assert_eq!(out.results.len(), 10);
    }

    #[test]
    fn floor_stops_retries() {
        let q = query_of(&[("visa", 2.0), ("renew", 1.0), ("fee", 0.5)], &[]);
        let fixture = FixtureProvider::default();
        let out = search_with_backoff(
            &fixture,
            &q,
            SearchScope::Web,
            &SourceClassifier::bundled(),
            &RelevanceFilter::default(),
        )
        .unwrap();
        assert_eq!(out.attempts.len(), 1);
        assert!(out.results.is_empty());
    }

    proptest! {
        #[test]
        fn entities_outlive_plain_terms(weights in proptest::collection::vec(0.0f64..5.0, 0..8), n_ent in 0usize..3) {
            let plain: Vec<(String, f64)> = weights.iter().enumerate().map(|(i, w)| (format!("t{i}"), *w)).collect();
            let plain_ref: Vec<(&str, f64)> = plain.iter().map(|(t, w)| (t.as_str(), *w)).collect();
            let ents: Vec<String> = (0..n_ent).map(|i| format!("E{i}")).collect();
            let ent_ref: Vec<&str> = ents.iter().map(String::as_str).collect();
            let mut q = query_of(&plain_ref, &ent_ref);
            let mut plain_left = plain.len();
            while let Some(t) = q.drop_weakest() {
                if t.entity {
                    prop_assert_eq!(plain_left, 0);
                } else {
                    plain_left -= 1;
                }
            }
        }

        #[test]
        fn classification_is_total(url in "\\PC{0,40}") {
            let c = SourceClassifier::bundled();
            let _ = c.classify(&url);
        }
    }
}
