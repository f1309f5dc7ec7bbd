//! Per-answer feature extraction over a loaded run, the feature cache,
//! and the train / evaluate / ablate runs built on it.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{labeled_instances, Goodness, InstanceRef, Thread};
use crate::credfeat::extract_credfeat;
use crate::embfeat::extract_embfeat;
use crate::error::{Error, Result};
use crate::evalkit::{
    ablate_hq, calibrate_chronological, evaluate_ensemble, evaluate_group_rows, feature_importance, run_baselines,
    variant_key, ChronoCalibration, EvalData, EvalReport, FoldPlan, ReportMetadata, CHRONOLOGICAL_TARGET_MAP,
    CHRONOLOGICAL_TOLERANCE,
};
use crate::evidence::{
    extract_forum_support, extract_hq_support, extract_thread_support, extract_web_support, retrieve_hq_evidence,
    HqVariant, QaSides, SimContext,
};
use crate::features::{FeatureGroup, FeatureTable, FeatureVector};
use crate::hashing::{combined_sha256, file_sha256, sha256_hex};
use crate::model::{self, EnsembleObjective, LinearModel};
use crate::resources::Resources;
use crate::retrieval::{
    generate_query, search_with_backoff, whole_text_query, FixtureProvider, Query, QueryOrigin, RecordingProvider,
    SearchProvider, SearchResult, SearchScope,
};
use crate::textproc::{build_index, tokenize, TfIdfIndex, TokenizedText};
use crate::userfeat::{
    extract_activity, extract_categories, extract_quality, score_goodness, train_goodness_model, ProfileIndex,
    QualityScores,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

struct ThreadText {
    question: TokenizedText,
    answers: Vec<TokenizedText>,
}

/// One search made while featurizing, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchLogEntry {
    pub answer_id: String,
    pub scope: SearchScope,
    pub attempts: Vec<Vec<String>>,
    pub urls: Vec<String>,
}

/// Shared state for extracting features of the labelled answers.
pub struct Pipeline<'a> {
    res: &'a Resources,
    instances: Vec<InstanceRef>,
    texts: HashMap<usize, ThreadText>,
    index: TfIdfIndex,
    profiles: ProfileIndex,
}

fn thread_text(t: &Thread) -> ThreadText {
    ThreadText {
        question: tokenize(&t.question.full_text()),
        answers: t.answers.iter().map(|a| tokenize(&a.body)).collect(),
    }
}

impl<'a> Pipeline<'a> {
    pub fn new(res: &'a Resources) -> Result<Self> {
        let instances = labeled_instances(&res.threads);
        if instances.is_empty() {
            return Err(Error::Invalid("the dataset has no fact-labelled answers".into()));
        }
        let needed: HashSet<usize> = instances.iter().map(|i| i.thread).collect();
        let texts: HashMap<usize, ThreadText> = res
            .threads
            .par_iter()
            .enumerate()
            .filter(|(i, _)| needed.contains(i))
            .map(|(i, t)| (i, thread_text(t)))
            .collect();
        let mut docs: Vec<TokenizedText> = Vec::new();
        for t in res.threads.iter().chain(&res.forum) {
            docs.push(tokenize(&t.question.full_text()));
            docs.extend(t.answers.iter().map(|a| tokenize(&a.body)));
        }
        let index = build_index(&docs)?;
        let activity = res.config.activity.to_activity_config()?;
        let profiles = ProfileIndex::build([res.threads.as_slice(), res.forum.as_slice()], &res.categories, &activity);
        Ok(Pipeline {
            res,
            instances,
            texts,
            index,
            profiles,
        })
    }

    pub fn instances(&self) -> &[InstanceRef] {
        &self.instances
    }

    pub fn answer_ids(&self) -> Vec<String> {
        self.instances
            .iter()
            .map(|i| self.res.threads[i.thread].answers[i.answer].id.clone())
            .collect()
    }

    pub fn index(&self) -> &TfIdfIndex {
        &self.index
    }

    fn text(&self, inst: &InstanceRef) -> (&TokenizedText, &TokenizedText, &ThreadText) {
        let t = &self.texts[&inst.thread];
        (&t.question, &t.answers[inst.answer], t)
    }

    /// Query used for web and forum search: generated from the Q&A pair.
    pub fn qa_query(&self, inst: &InstanceRef) -> Result<Query> {
        let (q, a, _) = self.text(inst);
        generate_query(&[q, a], QueryOrigin::QaPair, &self.index)
    }

    fn search(
        &self,
        provider: &dyn SearchProvider,
        inst: &InstanceRef,
        scope: SearchScope,
        log: &mut Vec<SearchLogEntry>,
    ) -> Result<Vec<SearchResult>> {
        let answer_id = &self.res.threads[inst.thread].answers[inst.answer].id;
        let query = match self.qa_query(inst) {
            Ok(q) => q,
            Err(Error::EmptyQuery) => {
                log::warn!("answer {answer_id}: empty query, no {scope:?} evidence");
                return Ok(Vec::new());
            }
            Err(e) => return Err(e),
        };
        let outcome = search_with_backoff(provider, &query, scope, &self.res.classifier, &self.res.filter)?;
        log.push(SearchLogEntry {
            answer_id: answer_id.clone(),
            scope,
            attempts: outcome.attempts.clone(),
            urls: outcome.results.iter().map(|r| r.url.clone()).collect(),
        });
        Ok(outcome.results)
    }

    /// Words of the HQ retrieval query of a variant.
    fn hq_query_words(&self, inst: &InstanceRef, variant: HqVariant) -> Vec<String> {
        let (q, a, _) = self.text(inst);
        let query = if variant.generated_query() {
            generate_query(&[q, a], QueryOrigin::QaPair, &self.index)
        } else {
            whole_text_query(a, QueryOrigin::Answer)
        };
        query.map(|q| q.words()).unwrap_or_default()
    }

    pub fn hq_features(&self, inst: &InstanceRef, variant: HqVariant) -> FeatureVector {
        let (_, a, _) = self.text(inst);
        let words = self.hq_query_words(inst, variant);
        let matches = retrieve_hq_evidence(&words, a, &self.res.hq, self.res.config.search.hq_k);
        extract_hq_support(&matches, variant.reranks())
    }

    /// Probability of Good for every answer: from the configured scores
    /// file, or from a Good/Bad model trained on all answers.
    pub fn quality_scores(&self) -> Result<QualityScores> {
        if let Some(s) = &self.res.quality_scores {
            return Ok(s.clone());
        }
        let answers: Vec<(&str, &str, Goodness)> = self
            .res
            .threads
            .iter()
            .chain(&self.res.forum)
            .flat_map(|t| t.answers.iter().map(|a| (a.id.as_str(), a.body.as_str(), a.goodness)))
            .collect();
        let spaces = &self.res.spaces;
        let lexicons = &self.res.lexicons;
        let examples: Vec<(FeatureVector, Goodness)> = answers
            .par_iter()
            .map(|(_, body, g)| {
                let tok = tokenize(body);
                let mut v = lexicons.extract(&tok);
                v.extend(extract_credfeat(&tok, spaces.oov_vocabulary()));
                v.extend(extract_embfeat(&tok, spaces));
                (v, *g)
            })
            .collect();
        let model = train_goodness_model(&examples, &self.res.config.train_config())?;
        score_goodness(&model, answers.iter().zip(&examples).map(|((id, _, _), (v, _))| (*id, v)))
    }

    /// Feature tables of the requested groups, in the requested order, plus
    /// the log of searches made.
    pub fn featurize(&self, groups: &[FeatureGroup]) -> Result<(Vec<(FeatureGroup, FeatureTable)>, Vec<SearchLogEntry>)> {
        let want = |g: FeatureGroup| groups.contains(&g);
        let cfg = &self.res.config;
        let web = match (&cfg.search.web, want(FeatureGroup::WebSupport)) {
            (Some(spec), true) => Some(self.res.provider(spec)?),
            (None, true) => {
                return Err(Error::Config("the web group needs a search.web provider".into()));
            }
            _ => None,
        };
        let forum = match (&cfg.search.forum, want(FeatureGroup::ForumSupport)) {
            (Some(spec), true) => Some(self.res.provider(spec)?),
            (None, true) => {
                return Err(Error::Config("the forum group needs a search.forum provider".into()));
            }
            _ => None,
        };
        let quality = if want(FeatureGroup::UserQuality) {
            Some(self.quality_scores()?)
        } else {
            None
        };
        let activity = self.profiles.config().clone();
        let ctx = SimContext::new(&self.index, &self.res.spaces);

        let per_answer: Vec<Result<(FeatureVector, Vec<SearchLogEntry>)>> = self
            .instances
            .par_iter()
            .map(|inst| {
                let thread = &self.res.threads[inst.thread];
                let answer = &thread.answers[inst.answer];
                let (q, a, tt) = self.text(inst);
                let profile = self.profiles.profile(&answer.user_id);
                let mut log = Vec::new();
                let mut v = FeatureVector::new();
                for g in groups {
                    match g {
                        FeatureGroup::UserCategories => v.extend(extract_categories(&profile)),
                        FeatureGroup::UserQuality => {
                            v.extend(extract_quality(&profile, quality.as_ref().expect("computed above")))
                        }
                        FeatureGroup::UserActivity => {
                            v.extend(extract_activity(&profile, &activity, self.profiles.reference_time))
                        }
                        FeatureGroup::Lexical => v.extend(self.res.lexicons.extract(a)),
                        FeatureGroup::Credibility => {
                            v.extend(extract_credfeat(a, self.res.spaces.oov_vocabulary()))
                        }
                        FeatureGroup::EmbGoogle | FeatureGroup::EmbQl => {
                            v.extend(extract_embfeat(a, &self.res.spaces).select(&[*g]))
                        }
                        FeatureGroup::WebSupport => {
                            let results =
                                self.search(web.as_deref().expect("checked"), inst, SearchScope::Web, &mut log)?;
                            v.extend(extract_web_support(&ctx, &QaSides::new(&ctx, q, a), &results));
                        }
                        FeatureGroup::ForumSupport => {
                            let results = self.search(
                                forum.as_deref().expect("checked"),
                                inst,
                                SearchScope::ForumOnly,
                                &mut log,
                            )?;
                            v.extend(extract_forum_support(&ctx, &QaSides::new(&ctx, q, a), &results));
                        }
                        FeatureGroup::ThreadSupport => {
                            v.extend(extract_thread_support(thread, &tt.answers, inst.answer, &self.res.spaces))
                        }
                        FeatureGroup::HqSupport => v.extend(self.hq_features(inst, HqVariant::S1)),
                    }
                }
                Ok((v, log))
            })
            .collect();
        let mut vectors = Vec::with_capacity(per_answer.len());
        let mut log = Vec::new();
        for r in per_answer {
            let (v, l) = r?;
            vectors.push(v);
            log.extend(l);
        }
        let table = FeatureTable::from_vectors(self.answer_ids(), vectors)?;
        Ok((groups.iter().map(|g| (*g, table.select(&[*g]))).collect(), log))
    }

    /// HQ-group table of one retrieval variant.
    pub fn hq_table(&self, variant: HqVariant) -> Result<FeatureTable> {
        let vectors: Vec<FeatureVector> = self.instances.par_iter().map(|i| self.hq_features(i, variant)).collect();
        FeatureTable::from_vectors(self.answer_ids(), vectors)
    }

    /// Replays the web and forum queries of every labelled answer against
    /// the given providers and keeps what they return.
    pub fn record(
        &self,
        web: Option<Box<dyn SearchProvider>>,
        forum: Option<Box<dyn SearchProvider>>,
    ) -> Result<(Option<FixtureProvider>, Option<FixtureProvider>)> {
        let run = |p: Box<dyn SearchProvider>, scope: SearchScope| -> Result<FixtureProvider> {
            let rec = RecordingProvider::new(p);
            let mut log = Vec::new();
            for inst in &self.instances {
                self.search(&rec, inst, scope, &mut log)?;
            }
            Ok(rec.fixture())
        };
        Ok((
            web.map(|p| run(p, SearchScope::Web)).transpose()?,
            forum.map(|p| run(p, SearchScope::ForumOnly)).transpose()?,
        ))
    }
}

impl SearchProvider for Box<dyn SearchProvider> {
    fn search(&self, terms: &[String], scope: SearchScope) -> Result<Vec<RawResultAlias>> {
        self.as_ref().search(terms, scope)
    }
}

type RawResultAlias = crate::retrieval::RawResult;

/// Bounds the worker threads used by every parallel stage.
pub fn set_jobs(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// On-disk form of one group's feature table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFile {
    pub version: String,
    pub name: String,
    pub key: String,
    pub table: FeatureTable,
}

/// Feature tables cached under `<output>/features`, keyed by a hash of the
/// configuration and every input file.
pub struct FeatureStore {
    dir: PathBuf,
    key_base: String,
}

impl FeatureStore {
    pub fn new(res: &Resources) -> Self {
        let mut cfg = res.config.clone();
        cfg.evaluation = Default::default();
        cfg.record = Default::default();
        cfg.output_dir = PathBuf::new();
        let key_base = combined_sha256([
            ("version", TOOL_VERSION),
            ("config", &cfg.hash()),
            ("inputs", &res.inputs_hash()),
        ]);
        FeatureStore {
            dir: res.config.output_dir().join("features"),
            key_base,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(&self, name: &str) -> String {
        combined_sha256([("base", self.key_base.as_str()), ("name", name)])
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.json"))
    }

    /// The cached table, or `None` when it is missing or was computed from
    /// other inputs.
    pub fn load(&self, name: &str) -> Result<Option<FeatureTable>> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: FeatureFile = match serde_json::from_str(&text) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("ignoring unreadable feature file {}: {e}", path.display());
                return Ok(None);
            }
        };
        if file.key != self.key(name) {
            log::info!("feature file {} is stale; recomputing", path.display());
            return Ok(None);
        }
        Ok(Some(file.table))
    }

    pub fn save(&self, name: &str, table: &FeatureTable) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let file = FeatureFile {
            version: TOOL_VERSION.into(),
            name: name.into(),
            key: self.key(name),
            table: table.clone(),
        };
        let path = self.path(name);
        write_text(&path, &to_json(&file)?)?;
        Ok(path)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Tables of the requested groups, from the cache when fresh. Groups
/// computed here are written back to the cache. Returns the combined table
/// and the search log of any computation.
pub fn load_or_compute(
    pipeline: &Pipeline,
    store: &FeatureStore,
    groups: &[FeatureGroup],
    refresh: bool,
) -> Result<(FeatureTable, Vec<SearchLogEntry>)> {
    let mut cached: BTreeMap<FeatureGroup, FeatureTable> = BTreeMap::new();
    let mut missing = Vec::new();
    for g in groups {
        match (refresh, store.load(g.key())?) {
            (false, Some(t)) => {
                cached.insert(*g, t);
            }
            _ => missing.push(*g),
        }
    }
    let mut log = Vec::new();
    if !missing.is_empty() {
        let keys: Vec<&str> = missing.iter().map(|g| g.key()).collect();
        log::info!("extracting features: {}", keys.join(", "));
        let (tables, l) = pipeline.featurize(&missing)?;
        log = l;
        for (g, t) in tables {
            store.save(g.key(), &t)?;
            cached.insert(g, t);
        }
    }
    let mut table = FeatureTable::default();
    for g in groups {
        table.hstack(&cached[g])?;
    }
    Ok((table, log))
}

/// The search log as JSON Lines.
pub fn search_log_jsonl(log: &[SearchLogEntry]) -> Result<String> {
    let mut out = String::new();
    for entry in log {
        out.push_str(&serde_json::to_string(entry)?);
        out.push('\n');
    }
    Ok(out)
}

/// Inputs, outputs and settings of one command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, res: &Resources) -> Self {
        Manifest {
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            seed: res.config.seed,
            config_hash: res.config.hash(),
            inputs: res.input_hashes.clone(),
            outputs: BTreeMap::new(),
        }
    }

    /// Writes `text` to `path` and records its hash under `name`.
    pub fn write_output(&mut self, name: &str, path: &Path, text: &str) -> Result<()> {
        write_text(path, text)?;
        self.outputs.insert(name.into(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    /// Records the hash of a file already written under `name`.
    pub fn record_file(&mut self, name: &str, path: &Path) -> Result<()> {
        self.outputs.insert(name.into(), file_sha256(path)?);
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("manifest.{}.json", self.command));
        write_text(&path, &to_json(self)?)?;
        Ok(path)
    }
}

fn metadata(res: &Resources, data: &EvalData) -> ReportMetadata {
    let t = res.config.train_config();
    ReportMetadata {
        tool_version: TOOL_VERSION.into(),
        seed: t.seed,
        lambda: t.lambda,
        epochs: t.epochs,
        config_hash: res.config.hash(),
        dataset_hash: res.dataset_hash(),
        fixture_hash: res.fixture_hash(),
        questions: data.by_thread().len(),
        instances: data.len(),
        positives: data.positives(),
        chronological: None,
        notes: Vec::new(),
    }
}

/// Groups with at least one column; the others are reported as notes.
fn usable_groups(table: &FeatureTable, groups: &[FeatureGroup], notes: &mut Vec<String>) -> Vec<FeatureGroup> {
    groups
        .iter()
        .copied()
        .filter(|g| {
            let ok = table.groups.contains(g);
            if !ok {
                notes.push(format!("group {} skipped: no features (resource not configured)", g.key()));
            }
            ok
        })
        .collect()
}

pub struct EvaluateOptions {
    pub groups: Vec<FeatureGroup>,
    pub ensembles: bool,
    pub importance: bool,
    pub expect_paper: bool,
    pub refresh: bool,
}

pub struct Evaluation {
    pub report: EvalReport,
    /// Model fitted on every labelled answer with the evaluated groups.
    pub model: LinearModel,
    pub search_log: Vec<SearchLogEntry>,
}

/// Fits one model on all labelled answers.
pub fn train_full(table: &FeatureTable, data: &EvalData, res: &Resources) -> Result<LinearModel> {
    model::fit(&table.rows, &data.labels, &table.names, &res.config.train_config())
}

pub fn evaluate(res: &Resources, opts: &EvaluateOptions) -> Result<Evaluation> {
    let pipeline = Pipeline::new(res)?;
    let store = FeatureStore::new(res);
    let mut wanted = opts.groups.clone();
    if !wanted.contains(&FeatureGroup::Credibility) {
        wanted.push(FeatureGroup::Credibility);
    }
    let (table, search_log) = load_or_compute(&pipeline, &store, &wanted, opts.refresh)?;
    let data = EvalData::from_threads(&res.threads);
    let plan = FoldPlan::from_data(&data);
    let train = res.config.train_config();
    let mut meta = metadata(res, &data);
    let groups = usable_groups(&table, &opts.groups, &mut meta.notes);
    if groups.is_empty() {
        return Err(Error::Config("none of the selected feature groups produced features".into()));
    }

    let mut report = EvalReport::default();
    report.rows = evaluate_group_rows(&table, &groups, &data, &plan, &train)?;
    if opts.ensembles && groups.len() > 1 {
        for objective in [EnsembleObjective::Accuracy, EnsembleObjective::Map] {
            let (e, row) = evaluate_ensemble(&table, &groups, objective, &data, &plan, &train)?;
            report.rows.push(row);
            report.ensembles.push(e);
        }
        meta.notes.push(
            "ensemble groups are selected with leave-one-thread-out scores over the whole dataset, so ensemble rows are optimistic"
                .into(),
        );
    }

    let calibration = match res.config.evaluation.chronological.fixed() {
        Some(order) => {
            let c = calibrate_chronological(&data, CHRONOLOGICAL_TARGET_MAP, CHRONOLOGICAL_TOLERANCE);
            ChronoCalibration {
                chosen: order,
                ..c
            }
        }
        None => calibrate_chronological(&data, CHRONOLOGICAL_TARGET_MAP, CHRONOLOGICAL_TOLERANCE),
    };
    log::info!(
        "chronological MAP: ascending {:?}, descending {:?}, using {:?}",
        calibration.ascending,
        calibration.descending,
        calibration.chosen
    );
    meta.chronological = Some(calibration);
    report
        .rows
        .extend(run_baselines(&table, &data, &plan, &train, calibration.chosen)?);

    let selected = table.select(&groups);
    let model = train_full(&selected, &data, res)?;
    if opts.importance {
        report.importance = Some(feature_importance(&model));
    }
    report.metadata = meta;
    if opts.expect_paper {
        report.attach_published();
    }
    report.sort_rows();
    Ok(Evaluation {
        report,
        model,
        search_log,
    })
}

/// S1–S4 rows of the HQ group.
pub fn ablate(res: &Resources, expect_paper: bool) -> Result<EvalReport> {
    let pipeline = Pipeline::new(res)?;
    let store = FeatureStore::new(res);
    let mut variants = Vec::new();
    for v in HqVariant::ALL {
        let name = format!("hq.{}", variant_key(v));
        let table = match store.load(&name)? {
            Some(t) => t,
            None => {
                let t = pipeline.hq_table(v)?;
                store.save(&name, &t)?;
                t
            }
        };
        variants.push((v, table));
    }
    let data = EvalData::from_threads(&res.threads);
    let plan = FoldPlan::from_data(&data);
    let mut report = EvalReport {
        metadata: metadata(res, &data),
        rows: ablate_hq(&variants, &data, &plan, &res.config.train_config())?,
        ..Default::default()
    };
    if expect_paper {
        report.attach_published();
    }
    Ok(report)
}
