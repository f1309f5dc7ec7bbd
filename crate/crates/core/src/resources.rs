//! Loads every input a run needs, as named by a [`RunConfig`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use crate::config::{ProviderSpec, RunConfig};
use crate::corpus::{load_dataset, Thread};
use crate::embfeat::{EmbeddingSpace, EmbeddingSpaces};
use crate::error::{Error, Result};
use crate::evidence::{HqIndex, HqPost};
use crate::hashing::{combined_sha256, file_sha256};
use crate::lexfeat::BiasLexicons;
use crate::retrieval::{
    FixtureProvider, LiveProvider, LocalDocument, LocalIndexProvider, RelevanceFilter, SearchProvider,
    SourceClassifier,
};
use crate::userfeat::{CategoryList, QualityScores};

pub struct Resources {
    pub config: RunConfig,
    pub threads: Vec<Thread>,
    /// Forum threads, without those of the annotated dataset.
    pub forum: Vec<Thread>,
    pub categories: CategoryList,
    pub lexicons: BiasLexicons,
    pub spaces: EmbeddingSpaces,
    pub classifier: SourceClassifier,
    pub filter: RelevanceFilter,
    pub hq: HqIndex,
    pub quality_scores: Option<QualityScores>,
    /// SHA-256 of every input file, keyed by config key.
    pub input_hashes: BTreeMap<String, String>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Author ids, one per line; `#` starts a comment line.
pub fn load_trusted_authors(path: &Path) -> Result<BTreeSet<String>> {
    Ok(read(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// A forum thread as a searchable page.
pub fn thread_document(thread: &Thread, forum_host: &str) -> LocalDocument {
    let mut text = thread.question.body.clone();
    for a in &thread.answers {
        text.push('\n');
        text.push_str(&a.body);
    }
    LocalDocument {
        url: format!("https://www.{forum_host}/forum/posts/{}", thread.question.id),
        title: thread.question.subject.clone(),
        text,
    }
}

impl Resources {
    pub fn load(config: &RunConfig) -> Result<Self> {
        config.check_files()?;
        let mut input_hashes = BTreeMap::new();
        for (key, path) in config.referenced_files() {
            input_hashes.insert(key, file_sha256(&path)?);
        }
        if let Some(dir) = &config.resources.lexicon_dir {
            input_hashes.insert("resources.lexicon_dir".into(), dir_hash(&config.resolve(dir))?);
        }

        let threads = load_dataset(&config.resolve(&config.data.dataset))?;
        let dataset_ids: HashSet<&str> = threads.iter().map(|t| t.question.id.as_str()).collect();
        let forum = match &config.data.forum_dump {
            Some(p) => load_dataset(&config.resolve(p))?
                .into_iter()
                .filter(|t| !dataset_ids.contains(t.question.id.as_str()))
                .collect(),
            None => Vec::new(),
        };
        let categories = match &config.data.categories {
            Some(p) => CategoryList::load(&config.resolve(p))?,
            None => CategoryList::bundled().clone(),
        };
        let lexicons = match &config.resources.lexicon_dir {
            Some(dir) => {
                let mut lex = BiasLexicons::from_dir(&config.resolve(dir))?;
                lex.expand_multiword_cues();
                lex
            }
            None => BiasLexicons::bundled().clone(),
        };
        let spaces = EmbeddingSpaces {
            general: config
                .resources
                .embeddings_general
                .as_ref()
                .map(|p| EmbeddingSpace::load(&config.resolve(p), "general"))
                .transpose()?,
            domain: config
                .resources
                .embeddings_domain
                .as_ref()
                .map(|p| EmbeddingSpace::load(&config.resolve(p), "domain"))
                .transpose()?,
        };
        let classifier = {
            let bundled = SourceClassifier::bundled();
            match (&config.resources.reputed_domains, &config.resources.forum_domains) {
                (None, None) => bundled,
                (r, f) => {
                    let reputed = match r {
                        Some(p) => read(&config.resolve(p))?,
                        None => include_str!("../data/reputed_domains.txt").to_string(),
                    };
                    let forum = match f {
                        Some(p) => read(&config.resolve(p))?,
                        None => include_str!("../data/forum_domains.txt").to_string(),
                    };
                    SourceClassifier::from_lists(&reputed, &forum)
                }
            }
        };
        let hq = {
            let trusted = match &config.resources.trusted_authors {
                Some(p) => load_trusted_authors(&config.resolve(p))?,
                None => BTreeSet::new(),
            };
            let source = match &config.resources.hq_posts {
                Some(p) => load_dataset(&config.resolve(p))?,
                None => forum.clone(),
            };
            if trusted.is_empty() {
                log::warn!("no trusted authors configured; high-quality post features will be zero");
            }
            HqIndex::build(&HqPost::from_threads(&source, &trusted))?
        };
        let quality_scores = config
            .data
            .quality_scores
            .as_ref()
            .map(|p| QualityScores::load(&config.resolve(p)))
            .transpose()?;
        Ok(Resources {
            config: config.clone(),
            threads,
            forum,
            categories,
            lexicons,
            spaces,
            classifier,
            filter: config.search.relevance_filter(),
            hq,
            quality_scores,
            input_hashes,
        })
    }

    pub fn dataset_hash(&self) -> String {
        self.input_hashes.get("data.dataset").cloned().unwrap_or_default()
    }

    /// Hash over the search fixtures and page collections; `none` without any.
    pub fn fixture_hash(&self) -> String {
        let parts: Vec<(&str, &str)> = self
            .input_hashes
            .iter()
            .filter(|(k, _)| k.starts_with("search."))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            combined_sha256(parts)
        }
    }

    /// Hash over every input file.
    pub fn inputs_hash(&self) -> String {
        combined_sha256(self.input_hashes.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn provider(&self, spec: &ProviderSpec) -> Result<Box<dyn SearchProvider>> {
        Ok(match spec {
            ProviderSpec::Fixture { path, strict } => {
                let mut p = FixtureProvider::load(&self.config.resolve(path))?;
                p.strict = *strict;
                Box::new(p)
            }
            ProviderSpec::Local { pages } => Box::new(LocalIndexProvider::new(
                LocalIndexProvider::load_documents(&self.config.resolve(pages))?,
                &self.config.search.forum_host,
            )?),
            ProviderSpec::ForumDump => {
                if self.forum.is_empty() {
                    return Err(Error::Config("forum search needs a non-empty data.forum_dump".into()));
                }
                let host = &self.config.search.forum_host;
                let docs = self.forum.iter().map(|t| thread_document(t, host)).collect();
                Box::new(LocalIndexProvider::new(docs, host)?)
            }
            ProviderSpec::Live(live) => Box::new(LiveProvider::new(live.clone())?),
        })
    }
}

/// Hash of the file names and contents of a directory, in name order.
fn dir_hash(dir: &Path) -> Result<String> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    let mut parts = Vec::new();
    for p in entries {
        parts.push((p.file_name().unwrap_or_default().to_string_lossy().into_owned(), file_sha256(&p)?));
    }
    Ok(combined_sha256(parts.iter().map(|(a, b)| (a.as_str(), b.as_str()))))
}
