//! Search providers: recorded fixtures, a local TF-IDF index over a page
//! collection, a live HTTP adapter and a recorder wrapping any provider.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{url_host, SearchScope};
use crate::error::{Error, Result};
use crate::textproc::{tokenize, TfIdfIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResult {
    pub url: String,
    pub snippet: String,
    #[serde(default)]
    pub page_text: Option<String>,
    pub rank: u32,
}

pub trait SearchProvider: Send + Sync {
    /// Results for rendered query terms, ranked from 1.
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResult>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub query_terms: Vec<String>,
    pub scope: SearchScope,
    pub results: Vec<RawResult>,
}

type FixtureKey = (SearchScope, Vec<String>);

/// Replays recorded searches. Unrecorded queries return no results, or an
/// error when `strict` is set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureProvider {
    records: BTreeMap<FixtureKey, Vec<RawResult>>,
    pub strict: bool,
}

impl FixtureProvider {
    pub fn insert(&mut self, terms: Vec<String>, scope: SearchScope, results: Vec<RawResult>) {
        self.records.insert((scope, terms), results);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn parse(reader: impl BufRead, source_name: &str) -> Result<Self> {
        let mut out = FixtureProvider::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: FixtureRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                source_name: source_name.to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            let mut ranks = HashSet::new();
            if !rec.results.iter().all(|r| ranks.insert(r.rank)) {
                return Err(Error::Parse {
                    source_name: source_name.to_string(),
                    line: i + 1,
                    message: "duplicate result rank".into(),
                });
            }
            out.insert(rec.query_terms, rec.scope, rec.results);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Adds every record of another fixture (later files win).
    pub fn merge(&mut self, other: FixtureProvider) {
        self.records.extend(other.records);
    }

    /// Records in key order, so equal contents give identical files.
    pub fn write(&self, mut writer: impl Write) -> std::io::Result<()> {
        for ((scope, terms), results) in &self.records {
            let rec = FixtureRecord {
                query_terms: terms.clone(),
                scope: *scope,
                results: results.clone(),
            };
            writeln!(writer, "{}", serde_json::to_string(&rec)?)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

impl SearchProvider for FixtureProvider {
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResult>> {
        match self.records.get(&(scope, terms.to_vec())) {
            Some(r) => Ok(r.clone()),
            None if self.strict => Err(Error::Provider {
                query: terms.to_vec(),
                message: format!("no recorded {scope:?} results for this query"),
            }),
            None => Ok(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDocument {
    pub url: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

struct IndexedDoc {
    doc: LocalDocument,
    terms: Vec<String>,
    term_set: HashSet<String>,
    sentences: Vec<(String, HashSet<String>)>,
    forum: bool,
}

/// Search over a local page collection: a document matches when it
/// contains every query word; matches are ranked by TF-IDF cosine with the
/// query (ties by URL). The snippet is the sentence with most query words.
pub struct LocalIndexProvider {
    docs: Vec<IndexedDoc>,
    index: TfIdfIndex,
}

const SNIPPET_CHARS: usize = 300;

impl LocalIndexProvider {
    /// `forum_host` marks the documents searchable with `ForumOnly` scope.
    pub fn new(documents: Vec<LocalDocument>, forum_host: &str) -> Result<Self> {
        let mut docs = Vec::new();
        for doc in documents {
            let full = if doc.title.is_empty() {
                doc.text.clone()
            } else {
                format!("{}\n{}", doc.title, doc.text)
            };
            let tok = tokenize(&full);
            let terms = tok.terms();
            let sentences = (0..tok.sentences.len())
                .map(|i| {
                    let words = tok
                        .sentence_tokens(i)
                        .iter()
                        .filter(|t| t.is_word_like())
                        .map(|t| t.lower.clone())
                        .collect();
                    (tok.sentence_text(i), words)
                })
                .collect();
            let forum = url_host(&doc.url).is_some_and(|h| h == forum_host || h.ends_with(&format!(".{forum_host}")));
            docs.push(IndexedDoc {
                term_set: terms.iter().cloned().collect(),
                terms,
                sentences,
                forum,
                doc,
            });
        }
        let index = TfIdfIndex::build(docs.iter().map(|d| d.terms.as_slice()))?;
        Ok(LocalIndexProvider { docs, index })
    }

    pub fn load_documents(path: &Path) -> Result<Vec<LocalDocument>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(line).map_err(|e| Error::Parse {
                source_name: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

fn query_words(terms: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for t in terms {
        for w in tokenize(&t.replace('"', " ")).terms() {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

impl SearchProvider for LocalIndexProvider {
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResult>> {
        let words = query_words(terms);
        if words.is_empty() {
            return Ok(Vec::new());
        }
        let qv = self.index.vectorize(&words);
        let mut hits: Vec<(f64, &IndexedDoc)> = self
            .docs
            .iter()
            .filter(|d| scope == SearchScope::Web || d.forum)
            .filter(|d| words.iter().all(|w| d.term_set.contains(w)))
            .map(|d| (qv.cosine(&self.index.vectorize(&d.terms)), d))
            .collect();
        hits.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.doc.url.cmp(&b.1.doc.url)));
        hits.truncate(super::RESULTS_WANTED);
        Ok(hits
            .into_iter()
            .enumerate()
            .map(|(i, (_, d))| {
                let best = d
                    .sentences
                    .iter()
                    .map(|(s, set)| (words.iter().filter(|w| set.contains(*w)).count(), s))
                    .fold((0, ""), |acc, (n, s)| if n > acc.0 { (n, s.as_str()) } else { acc });
                let snippet: String = best.1.chars().take(SNIPPET_CHARS).collect();
                RawResult {
                    url: d.doc.url.clone(),
                    snippet,
                    page_text: Some(d.doc.text.clone()),
                    rank: i as u32 + 1,
                }
            })
            .collect())
    }
}

/// Live web search over an HTTP JSON API returning
/// `{"webPages": {"value": [{"url", "snippet"}]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    pub endpoint: String,
    /// Environment variable holding the subscription key.
    pub api_key_env: String,
    #[serde(default = "default_count")]
    pub count: u32,
    #[serde(default = "default_delay")]
    pub min_delay_ms: u64,
    #[serde(default = "default_forum_site")]
    pub forum_site: String,
    #[serde(default)]
    pub fetch_pages: bool,
}

fn default_count() -> u32 {
    10
}

fn default_delay() -> u64 {
    1000
}

fn default_forum_site() -> String {
    "qatarliving.com".into()
}

pub struct LiveProvider {
    config: LiveConfig,
    api_key: String,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl LiveProvider {
    pub fn new(config: LiveConfig) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            Error::Config(format!(
                "environment variable {} with the search API key is not set",
                config.api_key_env
            ))
        })?;
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(30)).build();
        Ok(LiveProvider {
            config,
            api_key,
            agent,
            last_request: Mutex::new(None),
        })
    }

    /// Serializes requests and keeps the configured gap between them.
    fn throttled<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut last = self.last_request.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(prev) = *last {
            let gap = Duration::from_millis(self.config.min_delay_ms);
            let elapsed = prev.elapsed();
            if elapsed < gap {
                std::thread::sleep(gap - elapsed);
            }
        }
        let out = f();
        *last = Some(Instant::now());
        out
    }

    fn fetch_page(&self, url: &str) -> Option<String> {
        let body = self
            .throttled(|| self.agent.get(url).call())
            .ok()?
            .into_string()
            .ok()?;
        Some(strip_html(&body))
    }
}

#[derive(Deserialize)]
struct ApiResponse {
    #[serde(rename = "webPages")]
    web_pages: Option<ApiPages>,
}

#[derive(Deserialize)]
struct ApiPages {
    value: Vec<ApiPage>,
}

#[derive(Deserialize)]
struct ApiPage {
    url: String,
    #[serde(default)]
    snippet: String,
}

impl SearchProvider for LiveProvider {
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResult>> {
        let mut q = terms.join(" ");
        if scope == SearchScope::ForumOnly {
            q.push_str(&format!(" site:{}", self.config.forum_site));
        }
        let perr = |message: String| Error::Provider {
            query: terms.to_vec(),
            message,
        };
        let response = self
            .throttled(|| {
                self.agent
                    .get(&self.config.endpoint)
                    .query("q", &q)
                    .query("count", &self.config.count.to_string())
                    .set("Ocp-Apim-Subscription-Key", &self.api_key)
                    .call()
            })
            .map_err(|e| perr(e.to_string()))?;
        let parsed: ApiResponse = response.into_json().map_err(|e| perr(e.to_string()))?;
        let pages = parsed.web_pages.map(|p| p.value).unwrap_or_default();
        Ok(pages
            .into_iter()
            .take(self.config.count as usize)
            .enumerate()
            .map(|(i, p)| RawResult {
                page_text: if self.config.fetch_pages {
                    self.fetch_page(&p.url)
                } else {
                    None
                },
                url: p.url,
                snippet: p.snippet,
                rank: i as u32 + 1,
            })
            .collect())
    }
}

/// Drops tags, scripts and styles; collapses whitespace.
pub fn strip_html(html: &str) -> String {
    let mut out = String::with_capacity(html.len() / 2);
    let lower = html.to_lowercase();
    let mut i = 0;
    let bytes = html.as_bytes();
    while i < bytes.len() {
        if bytes[i] == b'<' {
            let skip_block = ["<script", "<style"]
                .iter()
                .find(|t| lower[i..].starts_with(*t))
                .map(|t| format!("</{}", &t[1..]));
            let end = match skip_block {
                Some(close) => lower[i..].find(&close).map(|p| i + p + close.len()),
                None => Some(i),
            };
            match end.and_then(|e| lower[e..].find('>').map(|p| e + p + 1)) {
                Some(next) => {
                    out.push(' ');
                    i = next;
                    continue;
                }
                None => break,
            }
        }
        let ch = html[i..].chars().next().expect("char boundary");
        out.push(ch);
        i += ch.len_utf8();
    }
    crate::semeval::decode_entities(&out)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Passes searches through and keeps every answer for saving as a fixture.
pub struct RecordingProvider<P> {
    inner: P,
    recorded: Mutex<FixtureProvider>,
}

impl<P: SearchProvider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        RecordingProvider {
            inner,
            recorded: Mutex::new(FixtureProvider::default()),
        }
    }

    pub fn fixture(&self) -> FixtureProvider {
        self.recorded.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}

impl<P: SearchProvider> SearchProvider for RecordingProvider<P> {
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResult>> {
        let results = self.inner.search(terms, scope)?;
        self.recorded
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(terms.to_vec(), scope, results.clone());
        Ok(results)
    }
}
