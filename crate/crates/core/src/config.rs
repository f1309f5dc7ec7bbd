//! Declarative run configuration read from TOML.
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use chrono::{FixedOffset, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalkit::ChronoOrder;
use crate::features::{parse_group_list, FeatureGroup};
use crate::hashing::sha256_hex;
use crate::model::TrainConfig;
use crate::retrieval::{LiveConfig, RelevanceFilter};
use crate::userfeat::ActivityConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataConfig,
    #[serde(default)]
    pub resources: ResourceConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub activity: ActivitySettings,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub record: RecordConfig,
    /// Directory for features, models, reports and manifests.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/default")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Annotated threads, canonical JSON Lines.
    pub dataset: PathBuf,
    /// Unannotated forum threads used for profiles, forum search and indexing.
    #[serde(default)]
    pub forum_dump: Option<PathBuf>,
    /// Precomputed per-answer Good probabilities.
    #[serde(default)]
    pub quality_scores: Option<PathBuf>,
    #[serde(default)]
    pub categories: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceConfig {
    /// Directory with one `<bias type>.txt` file per lexicon.
    #[serde(default)]
    pub lexicon_dir: Option<PathBuf>,
    #[serde(default)]
    pub embeddings_general: Option<PathBuf>,
    #[serde(default)]
    pub embeddings_domain: Option<PathBuf>,
    #[serde(default)]
    pub reputed_domains: Option<PathBuf>,
    #[serde(default)]
    pub forum_domains: Option<PathBuf>,
    /// Threads holding high-quality posts; defaults to the forum dump.
    #[serde(default)]
    pub hq_posts: Option<PathBuf>,
    #[serde(default)]
    pub trusted_authors: Option<PathBuf>,
}

/// Where search results come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderSpec {
    /// Replay of recorded searches.
    Fixture {
        path: PathBuf,
        #[serde(default)]
        strict: bool,
    },
    /// Local page collection (JSON Lines of `{url, title, text}`).
    Local { pages: PathBuf },
    /// Threads of the forum dump served as forum pages.
    ForumDump,
    Live(LiveConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default)]
    pub web: Option<ProviderSpec>,
    #[serde(default)]
    pub forum: Option<ProviderSpec>,
    #[serde(default = "default_keywords")]
    pub relevance_keywords: Vec<String>,
    #[serde(default)]
    pub relevance_domains: Vec<String>,
    #[serde(default = "default_forum_host")]
    pub forum_host: String,
    #[serde(default = "default_hq_k")]
    pub hq_k: usize,
}

fn default_keywords() -> Vec<String> {
    vec!["qatar".into()]
}

fn default_forum_host() -> String {
    "qatarliving.com".into()
}

fn default_hq_k() -> usize {
    5
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            web: None,
            forum: None,
            relevance_keywords: default_keywords(),
            relevance_domains: Vec::new(),
            forum_host: default_forum_host(),
            hq_k: default_hq_k(),
        }
    }
}

impl SearchConfig {
    pub fn relevance_filter(&self) -> RelevanceFilter {
        RelevanceFilter {
            keywords: self.relevance_keywords.clone(),
            domains: self.relevance_domains.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_lambda() -> f64 {
    TrainConfig::default().lambda
}

fn default_epochs() -> usize {
    TrainConfig::default().epochs
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            lambda: default_lambda(),
            epochs: default_epochs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivitySettings {
    #[serde(default = "default_offset")]
    pub utc_offset_minutes: i32,
    #[serde(default = "default_weekend")]
    pub weekend: Vec<String>,
    #[serde(default = "default_jobs")]
    pub jobs_category: String,
    #[serde(default = "default_classifieds")]
    pub classifieds_category: String,
}

fn default_offset() -> i32 {
    180
}

fn default_weekend() -> Vec<String> {
    vec!["Fri".into(), "Sat".into()]
}

fn default_jobs() -> String {
    "Jobs".into()
}

fn default_classifieds() -> String {
    "Classifieds".into()
}

impl Default for ActivitySettings {
    fn default() -> Self {
        ActivitySettings {
            utc_offset_minutes: default_offset(),
            weekend: default_weekend(),
            jobs_category: default_jobs(),
            classifieds_category: default_classifieds(),
        }
    }
}

impl ActivitySettings {
    pub fn offset(&self) -> Result<FixedOffset> {
        FixedOffset::east_opt(self.utc_offset_minutes * 60)
            .ok_or_else(|| Error::Config(format!("utc_offset_minutes {} is out of range", self.utc_offset_minutes)))
    }

    pub fn to_activity_config(&self) -> Result<ActivityConfig> {
        let weekend = self
            .weekend
            .iter()
            .map(|d| {
                d.parse::<Weekday>()
                    .map_err(|_| Error::Config(format!("unknown weekday `{d}` in activity.weekend")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ActivityConfig {
            offset: self.offset()?,
            weekend,
            jobs_category: self.jobs_category.clone(),
            classifieds_category: self.classifieds_category.clone(),
        })
    }
}

/// Chronological baseline direction; `auto` calibrates against the
/// published value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChronoSetting {
    #[default]
    Auto,
    Ascending,
    Descending,
}

impl ChronoSetting {
    pub fn fixed(self) -> Option<ChronoOrder> {
        match self {
            ChronoSetting::Auto => None,
            ChronoSetting::Ascending => Some(ChronoOrder::Ascending),
            ChronoSetting::Descending => Some(ChronoOrder::Descending),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Comma-separated group keys, `embfeat` or `all`.
    #[serde(default = "default_groups")]
    pub groups: String,
    #[serde(default = "default_true")]
    pub ensembles: bool,
    #[serde(default = "default_true")]
    pub importance: bool,
    #[serde(default)]
    pub chronological: ChronoSetting,
}

fn default_groups() -> String {
    "all".into()
}

fn default_true() -> bool {
    true
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            groups: default_groups(),
            ensembles: true,
            importance: true,
            chronological: ChronoSetting::Auto,
        }
    }
}

/// Sources and destinations for `record-fixtures`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordConfig {
    #[serde(default)]
    pub web: Option<ProviderSpec>,
    #[serde(default)]
    pub forum: Option<ProviderSpec>,
    #[serde(default)]
    pub web_out: Option<PathBuf>,
    #[serde(default)]
    pub forum_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks value ranges and the group list.
    pub fn check(&self) -> Result<()> {
        if !(self.model.lambda > 0.0) {
            return Err(Error::Config("model.lambda must be positive".into()));
        }
        if self.model.epochs == 0 {
            return Err(Error::Config("model.epochs must be at least 1".into()));
        }
        if self.search.hq_k == 0 {
            return Err(Error::Config("search.hq_k must be at least 1".into()));
        }
        self.groups()?;
        self.activity.to_activity_config()?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn groups(&self) -> Result<Vec<FeatureGroup>> {
        let groups = parse_group_list(&self.evaluation.groups)?;
        if groups.is_empty() {
            return Err(Error::Config("evaluation.groups selects no feature group".into()));
        }
        Ok(groups)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lambda: self.model.lambda,
            epochs: self.model.epochs,
            seed: self.seed,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Every file path the config refers to, with its key.
    pub fn referenced_files(&self) -> Vec<(String, PathBuf)> {
        let mut out = vec![("data.dataset".to_string(), self.data.dataset.clone())];
        let mut opt = |key: &str, p: &Option<PathBuf>| {
            if let Some(p) = p {
                out.push((key.to_string(), p.clone()));
            }
        };
        opt("data.forum_dump", &self.data.forum_dump);
        opt("data.quality_scores", &self.data.quality_scores);
        opt("data.categories", &self.data.categories);
        opt("resources.embeddings_general", &self.resources.embeddings_general);
        opt("resources.embeddings_domain", &self.resources.embeddings_domain);
        opt("resources.reputed_domains", &self.resources.reputed_domains);
        opt("resources.forum_domains", &self.resources.forum_domains);
        opt("resources.hq_posts", &self.resources.hq_posts);
        opt("resources.trusted_authors", &self.resources.trusted_authors);
        for (key, spec) in [("search.web", &self.search.web), ("search.forum", &self.search.forum)] {
            match spec {
                Some(ProviderSpec::Fixture { path, .. }) => out.push((format!("{key}.path"), path.clone())),
                Some(ProviderSpec::Local { pages }) => out.push((format!("{key}.pages"), pages.clone())),
                _ => {}
            }
        }
        out.into_iter().map(|(k, p)| (k, self.resolve(&p))).collect()
    }

    /// Fails with the config key of the first referenced file that is missing.
    pub fn check_files(&self) -> Result<()> {
        for (key, path) in self.referenced_files() {
            if !path.exists() {
                return Err(Error::Config(format!("{key}: file not found: {}", path.display())));
            }
        }
        if let Some(dir) = &self.resources.lexicon_dir {
            let dir = self.resolve(dir);
            if !dir.is_dir() {
                return Err(Error::Config(format!(
                    "resources.lexicon_dir: directory not found: {}",
                    dir.display()
                )));
            }
        }
        if self.search.forum == Some(ProviderSpec::ForumDump) && self.data.forum_dump.is_none() {
            return Err(Error::Config("search.forum uses the forum dump but data.forum_dump is not set".into()));
        }
        Ok(())
    }

    /// Hash of the effective configuration (paths as written), leaving out
    /// the output directory.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output_dir = PathBuf::new();
        sha256_hex(cfg.to_toml().as_bytes())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
