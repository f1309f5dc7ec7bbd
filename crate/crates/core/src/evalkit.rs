//! Leave-one-thread-out evaluation, metrics, baselines and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{labeled_instances, BinaryLabel, Thread};
use crate::error::{Error, Result};
use crate::evidence::HqVariant;
use crate::features::{FeatureGroup, FeatureTable};
use crate::model::{self, EnsembleConfig, EnsembleObjective, LinearModel, TrainConfig};

/// The labelled answers being evaluated, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalData {
    pub ids: Vec<String>,
    pub question_ids: Vec<String>,
    pub thread: Vec<usize>,
    pub position: Vec<u32>,
    pub labels: Vec<BinaryLabel>,
}

impl EvalData {
    pub fn from_threads(threads: &[Thread]) -> Self {
        let instances = labeled_instances(threads);
        let mut data = EvalData {
            ids: Vec::with_capacity(instances.len()),
            question_ids: Vec::with_capacity(instances.len()),
            thread: Vec::with_capacity(instances.len()),
            position: Vec::with_capacity(instances.len()),
            labels: Vec::with_capacity(instances.len()),
        };
        for inst in instances {
            let t = &threads[inst.thread];
            let a = &t.answers[inst.answer];
            data.ids.push(a.id.clone());
            data.question_ids.push(t.question.id.clone());
            data.thread.push(inst.thread);
            data.position.push(a.thread_position);
            data.labels.push(inst.label);
        }
        data
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    /// Instance indices grouped by thread, threads in dataset order.
    pub fn by_thread(&self) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, t) in self.thread.iter().enumerate() {
            groups.entry(*t).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

/// One held-out thread. Indices refer to [`EvalData`] rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub question_id: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn from_data(data: &EvalData) -> Self {
        let folds = data
            .by_thread()
            .into_iter()
            .map(|test| {
                let question_id = data.question_ids[test[0]].clone();
                let train = (0..data.len()).filter(|i| data.thread[*i] != data.thread[test[0]]).collect();
                Fold {
                    question_id,
                    train,
                    test,
                }
            })
            .collect();
        FoldPlan { folds }
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// One fold per question with at least one labelled answer.
pub fn loto_folds(threads: &[Thread]) -> FoldPlan {
    FoldPlan::from_data(&EvalData::from_threads(threads))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_predictions(predictions: &[BinaryLabel], labels: &[BinaryLabel]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: predictions.len(),
                right: labels.len(),
            });
        }
        let mut c = Confusion::default();
        for (p, g) in predictions.iter().zip(labels) {
            match (p.is_positive(), g.is_positive()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Percentages for the Positive class. Undefined ratios are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn classification_metrics(predictions: &[BinaryLabel], labels: &[BinaryLabel]) -> Result<ClassificationMetrics> {
    let c = Confusion::from_predictions(predictions, labels)?;
    let accuracy = ratio(c.tp + c.tn, c.total());
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationMetrics {
        accuracy: 100.0 * accuracy,
        precision: 100.0 * precision,
        recall: 100.0 * recall,
        f1: 100.0 * f1,
    })
}

/// Average precision of a ranked list as a fraction, `None` without positives.
pub fn average_precision(ranked: &[BinaryLabel]) -> Option<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, l) in ranked.iter().enumerate() {
        if l.is_positive() {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

/// Orders by descending score; equal scores keep their input order.
pub fn rank_by_score(scored: &[(f64, BinaryLabel)]) -> Vec<BinaryLabel> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|a, b| scored[*b].0.total_cmp(&scored[*a].0));
    order.into_iter().map(|i| scored[i].1).collect()
}

/// MAP as a percentage over threads with at least one positive answer.
pub fn mean_average_precision(threads: &[Vec<(f64, BinaryLabel)>]) -> Option<f64> {
    let aps: Vec<f64> = threads
        .iter()
        .filter_map(|t| average_precision(&rank_by_score(t)))
        .collect();
    (!aps.is_empty()).then(|| 100.0 * aps.iter().sum::<f64>() / aps.len() as f64)
}

/// MAP of per-instance scores, grouped by thread.
pub fn map_of_scores(data: &EvalData, scores: &[f64]) -> Result<Option<f64>> {
    if scores.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: data.len(),
        });
    }
    let threads: Vec<Vec<(f64, BinaryLabel)>> = data
        .by_thread()
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| (scores[i], data.labels[i])).collect())
        .collect();
    Ok(mean_average_precision(&threads))
}

/// Out-of-fold margins and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotoRun {
    pub margins: Vec<f64>,
    pub predictions: Vec<BinaryLabel>,
}

/// Trains on each fold's training rows and scores its test rows. Folds run
/// in parallel; results are assembled in fold order.
pub fn loto_run(table: &FeatureTable, data: &EvalData, plan: &FoldPlan, config: &TrainConfig) -> Result<LotoRun> {
    if table.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: table.len(),
            right: data.len(),
        });
    }
    let per_fold: Vec<Result<Vec<(usize, f64)>>> = plan
        .folds
        .par_iter()
        .map(|fold| {
            let rows: Vec<Vec<f64>> = fold.train.iter().map(|i| table.rows[*i].clone()).collect();
            let labels: Vec<BinaryLabel> = fold.train.iter().map(|i| data.labels[*i]).collect();
            let m = model::fit(&rows, &labels, &table.names, config)?;
            fold.test
                .iter()
                .map(|i| Ok((*i, m.margin(&table.rows[*i])?)))
                .collect()
        })
        .collect();
    let mut margins = vec![f64::NAN; data.len()];
    for fold in per_fold {
        for (i, m) in fold? {
            margins[i] = m;
        }
    }
    if margins.iter().any(|m| m.is_nan()) {
        return Err(Error::Invalid("fold plan does not cover every instance".into()));
    }
    let predictions = margins.iter().map(|m| model::label_of(*m)).collect();
    Ok(LotoRun { margins, predictions })
}

/// Five table columns; absent metrics are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub map: Option<f64>,
}

impl Scores {
    pub fn classification(m: ClassificationMetrics, map: Option<f64>) -> Self {
        Scores {
            accuracy: Some(m.accuracy),
            precision: Some(m.precision),
            recall: Some(m.recall),
            f1: Some(m.f1),
            map,
        }
    }

    pub fn of_run(run: &LotoRun, data: &EvalData) -> Result<Self> {
        let m = classification_metrics(&run.predictions, &data.labels)?;
        Ok(Scores::classification(m, map_of_scores(data, &run.margins)?))
    }

    pub fn get(&self, objective: EnsembleObjective) -> f64 {
        match objective {
            EnsembleObjective::Accuracy => self.accuracy,
            EnsembleObjective::Map => self.map,
        }
        .unwrap_or(0.0)
    }
}

/// LOTO scores of a table restricted to some groups (none: bias only).
pub fn evaluate_groups(
    table: &FeatureTable,
    groups: &[FeatureGroup],
    data: &EvalData,
    plan: &FoldPlan,
    config: &TrainConfig,
) -> Result<Scores> {
    let run = loto_run(&table.select(groups), data, plan, config)?;
    Scores::of_run(&run, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    External,
    IntraForum,
    AnswerContent,
    UserProfile,
    Ensemble,
    Baseline,
    Ablation,
}

impl Section {
    pub fn title(self) -> &'static str {
        match self {
            Section::External => "External Evidence",
            Section::IntraForum => "Intra-Forum Evidence",
            Section::AnswerContent => "Answer Content",
            Section::UserProfile => "User Profile",
            Section::Ensemble => "Ensemble Systems",
            Section::Baseline => "Baselines",
            Section::Ablation => "High-quality Post Ablation",
        }
    }

    pub fn of_group(g: FeatureGroup) -> Section {
        match g {
            FeatureGroup::WebSupport => Section::External,
            FeatureGroup::ForumSupport | FeatureGroup::HqSupport | FeatureGroup::ThreadSupport => Section::IntraForum,
            FeatureGroup::Lexical | FeatureGroup::EmbQl | FeatureGroup::Credibility | FeatureGroup::EmbGoogle => {
                Section::AnswerContent
            }
            FeatureGroup::UserActivity | FeatureGroup::UserCategories | FeatureGroup::UserQuality => {
                Section::UserProfile
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub section: Section,
    pub key: String,
    pub name: String,
    pub rank: Option<u8>,
    pub dims: Option<usize>,
    pub scores: Scores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<Scores>,
}

const fn full(acc: f64, p: f64, r: f64, f1: f64, map: f64) -> Scores {
    Scores {
        accuracy: Some(acc),
        precision: Some(p),
        recall: Some(r),
        f1: Some(f1),
        map: Some(map),
    }
}

/// Published scores of a report row key.
pub fn published_scores(key: &str) -> Option<Scores> {
    Some(match key {
        "web" => full(63.45, 59.59, 89.84, 71.65, 67.71),
        "forum" => full(65.46, 66.41, 66.41, 66.41, 83.97),
        "hq" => full(60.24, 61.60, 60.16, 60.87, 74.50),
        "thread" => full(53.41, 53.53, 71.09, 61.07, 64.15),
        "lexfeat" => full(60.64, 60.42, 67.97, 63.97, 78.81),
        "emb_ql" => full(59.44, 59.71, 64.84, 62.17, 75.63),
        "credfeat" | "baseline.credibility" => full(56.23, 56.21, 67.19, 61.21, 64.92),
        "emb_google" => full(52.61, 53.62, 57.81, 55.64, 69.23),
        "user_activity" => full(42.57, 46.67, 82.03, 59.49, 69.04),
        "user_categories" => full(42.57, 46.67, 82.03, 59.49, 68.50),
        "user_quality" => full(28.92, 31.01, 31.25, 31.13, 67.43),
        "ensemble.accuracy" => full(72.29, 70.63, 78.91, 74.54, 74.32),
        "ensemble.map" => full(69.88, 70.87, 70.31, 70.59, 86.54),
        "baseline.all_positive" => Scores {
            map: None,
            ..full(51.41, 51.41, 100.0, 67.91, 0.0)
        },
        "baseline.chronological" => Scores {
            map: Some(63.75),
            ..Scores::default()
        },
        _ => return None,
    })
}

pub const CHRONOLOGICAL_TARGET_MAP: f64 = 63.75;
pub const CHRONOLOGICAL_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChronoOrder {
    /// Earlier answers rank higher.
    Ascending,
    /// Later answers rank higher.
    Descending,
}

pub fn chronological_scores(data: &EvalData, order: ChronoOrder) -> Vec<f64> {
    data.position
        .iter()
        .map(|p| match order {
            ChronoOrder::Ascending => -(*p as f64),
            ChronoOrder::Descending => *p as f64,
        })
        .collect()
}

pub fn chronological_map(data: &EvalData, order: ChronoOrder) -> Option<f64> {
    map_of_scores(data, &chronological_scores(data, order)).expect("aligned by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChronoCalibration {
    pub ascending: Option<f64>,
    pub descending: Option<f64>,
    pub chosen: ChronoOrder,
    pub matched: bool,
}

/// Tries ascending order first, then descending; keeps ascending when
/// neither reaches the target.
pub fn calibrate_chronological(data: &EvalData, target: f64, tolerance: f64) -> ChronoCalibration {
    let ascending = chronological_map(data, ChronoOrder::Ascending);
    let descending = chronological_map(data, ChronoOrder::Descending);
    let hits = |m: Option<f64>| m.is_some_and(|m| (m - target).abs() <= tolerance);
    let (chosen, matched) = if hits(ascending) {
        (ChronoOrder::Ascending, true)
    } else if hits(descending) {
        (ChronoOrder::Descending, true)
    } else {
        (ChronoOrder::Ascending, false)
    };
    ChronoCalibration {
        ascending,
        descending,
        chosen,
        matched,
    }
}

/// Credibility-only classifier, all-Positive and chronological rows.
pub fn run_baselines(
    credibility: &FeatureTable,
    data: &EvalData,
    plan: &FoldPlan,
    config: &TrainConfig,
    order: ChronoOrder,
) -> Result<Vec<ReportRow>> {
    let cred = evaluate_groups(credibility, &[FeatureGroup::Credibility], data, plan, config)?;
    let all_pos = vec![BinaryLabel::Positive; data.len()];
    let majority = classification_metrics(&all_pos, &data.labels)?;
    let chrono = Scores {
        map: chronological_map(data, order),
        ..Scores::default()
    };
    let row = |key: &str, name: &str, scores: Scores, dims: Option<usize>| ReportRow {
        section: Section::Baseline,
        key: key.to_string(),
        name: name.to_string(),
        rank: None,
        dims,
        scores,
        published: None,
    };
    Ok(vec![
        row(
            "baseline.credibility",
            "Credibility",
            cred,
            Some(credibility.select(&[FeatureGroup::Credibility]).dimension()),
        ),
        row(
            "baseline.all_positive",
            "All Positive (majority class)",
            Scores::classification(majority, None),
            None,
        ),
        row("baseline.chronological", "Thread order (chronological)", chrono, None),
    ])
}

/// One LOTO row per feature group.
pub fn evaluate_group_rows(
    table: &FeatureTable,
    groups: &[FeatureGroup],
    data: &EvalData,
    plan: &FoldPlan,
    config: &TrainConfig,
) -> Result<Vec<ReportRow>> {
    groups
        .iter()
        .map(|g| {
            let sub = table.select(&[*g]);
            if sub.dimension() == 0 {
                return Err(Error::Config(format!("feature group `{g}` has no columns in the feature table")));
            }
            Ok(ReportRow {
                section: Section::of_group(*g),
                key: g.key().to_string(),
                name: g.title().to_string(),
                rank: Some(g.published_rank()),
                dims: Some(sub.dimension()),
                scores: evaluate_groups(table, &[*g], data, plan, config)?,
                published: None,
            })
        })
        .collect()
}

/// Selects groups greedily by the LOTO objective over the whole dataset and
/// reports the LOTO scores of the selected set.
pub fn evaluate_ensemble(
    table: &FeatureTable,
    groups: &[FeatureGroup],
    objective: EnsembleObjective,
    data: &EvalData,
    plan: &FoldPlan,
    config: &TrainConfig,
) -> Result<(EnsembleConfig, ReportRow)> {
    let mut cache: BTreeMap<Vec<FeatureGroup>, Scores> = BTreeMap::new();
    let mut score_of = |set: &[FeatureGroup]| -> Result<Scores> {
        let mut key = set.to_vec();
        key.sort();
        if let Some(s) = cache.get(&key) {
            return Ok(*s);
        }
        let s = evaluate_groups(table, set, data, plan, config)?;
        cache.insert(key, s);
        Ok(s)
    };
    let ensemble = model::ensemble_select(groups, objective, |set| Ok(score_of(set)?.get(objective)))?;
    let scores = score_of(&ensemble.selected)?;
    let (key, name) = match objective {
        EnsembleObjective::Accuracy => ("ensemble.accuracy", "Optimizing for Accuracy"),
        EnsembleObjective::Map => ("ensemble.map", "Optimizing for MAP"),
    };
    let row = ReportRow {
        section: Section::Ensemble,
        key: key.to_string(),
        name: name.to_string(),
        rank: None,
        dims: Some(table.select(&ensemble.selected).dimension()),
        scores,
        published: None,
    };
    Ok((ensemble, row))
}

/// LOTO rows for the HQ group computed under each retrieval variant.
pub fn ablate_hq(
    variants: &[(HqVariant, FeatureTable)],
    data: &EvalData,
    plan: &FoldPlan,
    config: &TrainConfig,
) -> Result<Vec<ReportRow>> {
    variants
        .iter()
        .map(|(v, table)| {
            Ok(ReportRow {
                section: Section::Ablation,
                key: format!("ablation.{}", variant_key(*v)),
                name: format!("{} ({})", variant_key(*v).to_uppercase(), v.description()),
                rank: None,
                dims: Some(table.select(&[FeatureGroup::HqSupport]).dimension()),
                scores: evaluate_groups(table, &[FeatureGroup::HqSupport], data, plan, config)?,
                published: None,
            })
        })
        .collect()
}

pub fn variant_key(v: HqVariant) -> &'static str {
    match v {
        HqVariant::S1 => "s1",
        HqVariant::S2 => "s2",
        HqVariant::S3 => "s3",
        HqVariant::S4 => "s4",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimImportance {
    pub name: String,
    pub group: Option<FeatureGroup>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupImportance {
    pub group: FeatureGroup,
    pub mean_abs_weight: f64,
    pub dims: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub dims: Vec<DimImportance>,
    pub groups: Vec<GroupImportance>,
    pub top_lexical: Vec<DimImportance>,
}

/// Ranks weights of a model trained on scaled features by magnitude, ties
/// broken by name.
pub fn feature_importance(model: &LinearModel) -> ImportanceReport {
    let mut dims: Vec<DimImportance> = model
        .feature_names
        .iter()
        .zip(&model.weights)
        .map(|(n, w)| DimImportance {
            name: n.clone(),
            group: FeatureGroup::of_feature(n),
            weight: *w,
        })
        .collect();
    dims.sort_by(|a, b| b.weight.abs().total_cmp(&a.weight.abs()).then_with(|| a.name.cmp(&b.name)));
    let mut sums: BTreeMap<FeatureGroup, (f64, usize)> = BTreeMap::new();
    for d in &dims {
        if let Some(g) = d.group {
            let e = sums.entry(g).or_default();
            e.0 += d.weight.abs();
            e.1 += 1;
        }
    }
    let mut groups: Vec<GroupImportance> = sums
        .into_iter()
        .map(|(group, (s, n))| GroupImportance {
            group,
            mean_abs_weight: s / n as f64,
            dims: n,
        })
        .collect();
    groups.sort_by(|a, b| {
        b.mean_abs_weight
            .total_cmp(&a.mean_abs_weight)
            .then_with(|| a.group.key().cmp(b.group.key()))
    });
    let top_lexical = dims
        .iter()
        .filter(|d| d.group == Some(FeatureGroup::Lexical))
        .take(5)
        .cloned()
        .collect();
    ImportanceReport {
        dims,
        groups,
        top_lexical,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    pub seed: u64,
    pub lambda: f64,
    pub epochs: usize,
    pub config_hash: String,
    pub dataset_hash: String,
    pub fixture_hash: String,
    pub questions: usize,
    pub instances: usize,
    pub positives: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronological: Option<ChronoCalibration>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ensembles: Vec<EnsembleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<ImportanceReport>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "---".to_string(), |x| format!("{x:.2}"))
}

impl EvalReport {
    pub fn row(&self, key: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// Attaches published scores to every row that has them.
    pub fn attach_published(&mut self) {
        for r in &mut self.rows {
            r.published = published_scores(&r.key);
        }
    }

    /// Rows sorted by section, groups by published rank within a section.
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            a.section
                .cmp(&b.section)
                .then_with(|| a.rank.unwrap_or(u8::MAX).cmp(&b.rank.unwrap_or(u8::MAX)))
        });
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn render_text(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "qlfact {}", m.tool_version);
        let _ = writeln!(
            out,
            "questions {}  answers {}  positive {}  seed {}  lambda {}  epochs {}",
            m.questions, m.instances, m.positives, m.seed, m.lambda, m.epochs
        );
        let _ = writeln!(out, "config  {}", m.config_hash);
        let _ = writeln!(out, "dataset {}", m.dataset_hash);
        let _ = writeln!(out, "fixture {}", m.fixture_hash);
        if let Some(c) = &m.chronological {
            let _ = writeln!(
                out,
                "chronological MAP: ascending {} descending {} -> {} ({})",
                cell(c.ascending),
                cell(c.descending),
                match c.chosen {
                    ChronoOrder::Ascending => "ascending",
                    ChronoOrder::Descending => "descending",
                },
                if c.matched { "matches target" } else { "no match" }
            );
        }
        let name_w = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(10).max(24);
        let mut current: Option<Section> = None;
        for r in &self.rows {
            if current != Some(r.section) {
                current = Some(r.section);
                let _ = writeln!(out, "\n{}", r.section.title());
                let _ = writeln!(
                    out,
                    "{:>4}  {:<name_w$}  {:>5}  {:>7} {:>7} {:>7} {:>7} {:>7}",
                    "Rank", "Feature Group / System", "Dims", "Acc", "P", "R", "F1", "MAP"
                );
            }
            let s = &r.scores;
            let _ = writeln!(
                out,
                "{:>4}  {:<name_w$}  {:>5}  {:>7} {:>7} {:>7} {:>7} {:>7}",
                r.rank.map_or(String::new(), |x| x.to_string()),
                r.name,
                r.dims.map_or(String::new(), |x| x.to_string()),
                cell(s.accuracy),
                cell(s.precision),
                cell(s.recall),
                cell(s.f1),
                cell(s.map)
            );
            if let Some(p) = &r.published {
                let _ = writeln!(
                    out,
                    "{:>4}  {:<name_w$}  {:>5}  {:>7} {:>7} {:>7} {:>7} {:>7}",
                    "",
                    "  published",
                    "",
                    cell(p.accuracy),
                    cell(p.precision),
                    cell(p.recall),
                    cell(p.f1),
                    cell(p.map)
                );
            }
        }
        for e in &self.ensembles {
            let names: Vec<&str> = e.selected.iter().map(|g| g.key()).collect();
            let _ = writeln!(
                out,
                "\nensemble ({:?}): bias-only {:.2}; selected [{}]",
                e.objective,
                e.baseline_score,
                names.join(", ")
            );
            for step in &e.trace {
                let _ = writeln!(out, "  + {:<16} {:.2}", step.added.key(), step.score);
            }
        }
        if let Some(imp) = &self.importance {
            let _ = writeln!(out, "\nGroups by mean |weight|");
            for g in &imp.groups {
                let _ = writeln!(out, "  {:<16} {:>8.4}  ({} dims)", g.group.key(), g.mean_abs_weight, g.dims);
            }
            let _ = writeln!(out, "Top linguistic features");
            for d in &imp.top_lexical {
                let _ = writeln!(out, "  {:<24} {:>8.4}", d.name, d.weight);
            }
            let _ = writeln!(out, "Top features");
            for d in imp.dims.iter().take(20) {
                let _ = writeln!(out, "  {:<40} {:>8.4}", d.name, d.weight);
            }
        }
        for n in &m.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Answer, FactLabel, Goodness, Question};
    use approx::assert_abs_diff_eq;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    use BinaryLabel::{Negative as N, Positive as P};

    fn thread(qid: &str, labels: &[Option<FactLabel>]) -> Thread {
        let ts = Utc.with_ymd_and_hms(2016, 1, 1, 0, 0, 0).unwrap();
        Thread {
            question: Question {
                id: qid.into(),
                subject: "s".into(),
                body: "b".into(),
                category: "Visas and Permits".into(),
                timestamp: ts,
                user_id: "u0".into(),
            },
            answers: labels
                .iter()
                .enumerate()
                .map(|(i, l)| Answer {
                    id: format!("{qid}_C{}", i + 1),
                    body: "x".into(),
                    timestamp: ts,
                    user_id: format!("u{}", i + 1),
                    thread_position: i as u32 + 1,
                    goodness: if l.is_some() { Goodness::Good } else { Goodness::Bad },
                    fact_label: *l,
                })
                .collect(),
        }
    }

    #[test]
    fn two_thread_toy_gives_two_disjoint_folds() {
        let t = vec![
            thread("Q1", &[Some(FactLabel::FactTrue), Some(FactLabel::FactFalse)]),
            thread("Q2", &[None, Some(FactLabel::FactTrue)]),
            thread("Q3", &[None]),
        ];
        let plan = loto_folds(&t);
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.folds[0].test, vec![0, 1]);
        assert_eq!(plan.folds[0].train, vec![2]);
        assert_eq!(plan.folds[1].test, vec![2]);
        assert_eq!(plan.folds[1].question_id, "Q2");
    }

    #[test]
    fn metric_arithmetic() {
        let m = classification_metrics(&[P, P, N, N], &[P, N, P, N]).unwrap();
        assert_abs_diff_eq!(m.accuracy, 50.0);
        assert_abs_diff_eq!(m.precision, 50.0);
        assert_abs_diff_eq!(m.recall, 50.0);
        assert_abs_diff_eq!(m.f1, 50.0);
        let perfect = classification_metrics(&[P, N, P], &[P, N, P]).unwrap();
        assert_eq!(
            [perfect.accuracy, perfect.precision, perfect.recall, perfect.f1],
            [100.0; 4]
        );
        assert!(matches!(
            classification_metrics(&[P], &[P, N]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn majority_on_published_counts() {
        let mut gold = vec![P; 128];
        gold.extend(vec![N; 121]);
        let m = classification_metrics(&vec![P; 249], &gold).unwrap();
        assert_eq!(format!("{:.2}", m.accuracy), "51.41");
        assert_eq!(format!("{:.2}", m.precision), "51.41");
        assert_eq!(format!("{:.2}", m.recall), "100.00");
        // The published F1 is the harmonic mean of the rounded P and R.
        assert!((m.f1 - 67.91).abs() <= 0.01);
        assert!((m.accuracy / 100.0 - 128.0 / 249.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn ap_examples() {
        assert_eq!(mean_average_precision(&[vec![(2.0, P), (1.0, N)]]), Some(100.0));
        assert_eq!(mean_average_precision(&[vec![(2.0, N), (1.0, P)]]), Some(50.0));
        assert_eq!(mean_average_precision(&[vec![(1.0, N)]]), None);
        // Ties keep input order.
        assert_eq!(mean_average_precision(&[vec![(0.0, N), (0.0, P)]]), Some(50.0));
        // Threads without positives are excluded.
        assert_eq!(
            mean_average_precision(&[vec![(1.0, N)], vec![(1.0, P), (0.0, N)]]),
            Some(100.0)
        );
    }

    fn brute_force_ap(scored: &[(f64, BinaryLabel)]) -> Option<f64> {
        let n_pos = scored.iter().filter(|s| s.1.is_positive()).count();
        if n_pos == 0 {
            return None;
        }
        let rank = |i: usize| {
            1 + (0..scored.len())
                .filter(|&j| scored[j].0 > scored[i].0 || (scored[j].0 == scored[i].0 && j < i))
                .count()
        };
        let mut at_positives: Vec<(usize, f64)> = (0..scored.len())
            .filter(|&i| scored[i].1.is_positive())
            .map(|i| {
                let r = rank(i);
                let above = (0..scored.len())
                    .filter(|&j| scored[j].1.is_positive() && rank(j) <= r)
                    .count();
                (r, above as f64 / r as f64)
            })
            .collect();
        at_positives.sort_by_key(|p| p.0);
        Some(at_positives.iter().map(|p| p.1).sum::<f64>() / n_pos as f64)
    }

    proptest! {
        #[test]
        fn map_matches_brute_force(threads in prop::collection::vec(
            prop::collection::vec((0i32..5, any::<bool>()), 1..8), 1..10)) {
            let threads: Vec<Vec<(f64, BinaryLabel)>> = threads
                .into_iter()
                .map(|t| t.into_iter().map(|(s, p)| (s as f64, if p { P } else { N })).collect())
                .collect();
            let aps: Vec<f64> = threads.iter().filter_map(|t| brute_force_ap(t)).collect();
            let expected = (!aps.is_empty()).then(|| 100.0 * aps.iter().sum::<f64>() / aps.len() as f64);
            prop_assert_eq!(mean_average_precision(&threads), expected);
        }

        #[test]
        fn metrics_match_confusion_arithmetic(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let pred: Vec<BinaryLabel> = pairs.iter().map(|p| if p.0 { P } else { N }).collect();
            let gold: Vec<BinaryLabel> = pairs.iter().map(|p| if p.1 { P } else { N }).collect();
            let m = classification_metrics(&pred, &gold).unwrap();
            for v in [m.accuracy, m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=100.0).contains(&v));
            }
            let tp = pairs.iter().filter(|p| p.0 && p.1).count() as f64;
            let correct = pairs.iter().filter(|p| p.0 == p.1).count() as f64;
            prop_assert!((m.accuracy - 100.0 * correct / pairs.len() as f64).abs() < 1e-9);
            let pp = pairs.iter().filter(|p| p.0).count() as f64;
            if pp > 0.0 {
                prop_assert!((m.precision - 100.0 * tp / pp).abs() < 1e-9);
            }
        }
    }

    fn toy() -> (Vec<Thread>, FeatureTable) {
        use FactLabel::*;
        let threads = vec![
            thread("Q1", &[Some(FactTrue), Some(FactFalse), Some(FactTrue)]),
            thread("Q2", &[Some(FactFalse), Some(FactTrue)]),
            thread("Q3", &[Some(FactTrue), Some(FactFalse)]),
            thread("Q4", &[Some(FactFalse), Some(FactTrue), None]),
        ];
        let data = EvalData::from_threads(&threads);
        let mut vs = Vec::new();
        for (i, l) in data.labels.iter().enumerate() {
            let mut v = crate::features::FeatureVector::new();
            let s = if l.is_positive() { 1.0 } else { -1.0 };
            v.push(FeatureGroup::Lexical, "lex.signal", s + 0.01 * i as f64);
            v.push(FeatureGroup::Credibility, "cred.noise", ((i * 7) % 5) as f64);
            vs.push(v);
        }
        (threads, FeatureTable::from_vectors(data.ids.clone(), vs).unwrap())
    }

    #[test]
    fn loto_never_trains_on_the_test_thread() {
        let (threads, _) = toy();
        let data = EvalData::from_threads(&threads);
        let plan = FoldPlan::from_data(&data);
        for f in &plan.folds {
            for t in &f.test {
                assert!(!f.train.contains(t));
                assert!(f.train.iter().all(|i| data.thread[*i] != data.thread[*t]));
            }
        }
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort();
        assert_eq!(all, (0..data.len()).collect::<Vec<_>>());
    }

    #[test]
    fn informative_group_beats_majority_and_is_deterministic() {
        let (threads, table) = toy();
        let data = EvalData::from_threads(&threads);
        let plan = FoldPlan::from_data(&data);
        let cfg = TrainConfig::default();
        let s = evaluate_groups(&table, &[FeatureGroup::Lexical], &data, &plan, &cfg).unwrap();
        assert_eq!(s.accuracy, Some(100.0));
        assert_eq!(s.map, Some(100.0));
        let again = evaluate_groups(&table, &[FeatureGroup::Lexical], &data, &plan, &cfg).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn baselines_have_three_rows_with_the_right_gaps() {
        let (threads, table) = toy();
        let data = EvalData::from_threads(&threads);
        let plan = FoldPlan::from_data(&data);
        let rows = run_baselines(&table, &data, &plan, &TrainConfig::default(), ChronoOrder::Ascending).unwrap();
        assert_eq!(rows.len(), 3);
        let cred = &rows[0].scores;
        assert!(cred.accuracy.is_some() && cred.map.is_some());
        assert_eq!(rows[1].scores.map, None);
        assert_eq!(rows[1].scores.recall, Some(100.0));
        assert_eq!(rows[2].scores.accuracy, None);
        assert!(rows[2].scores.map.is_some());
    }

    #[test]
    fn chronological_directions() {
        use FactLabel::*;
        let threads = vec![thread("Q1", &[Some(FactTrue), Some(FactFalse), Some(FactFalse)])];
        let data = EvalData::from_threads(&threads);
        assert_eq!(chronological_map(&data, ChronoOrder::Ascending), Some(100.0));
        assert_abs_diff_eq!(chronological_map(&data, ChronoOrder::Descending).unwrap(), 100.0 / 3.0, epsilon = 1e-9);
        let c = calibrate_chronological(&data, 100.0 / 3.0, 0.5);
        assert_eq!(c.chosen, ChronoOrder::Descending);
        assert!(c.matched);
        let none = calibrate_chronological(&data, 70.0, 0.5);
        assert_eq!(none.chosen, ChronoOrder::Ascending);
        assert!(!none.matched);
    }

    fn model_with(names: &[&str], weights: &[f64]) -> LinearModel {
        LinearModel {
            version: model::MODEL_FORMAT_VERSION,
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            weights: weights.to_vec(),
            bias: 0.0,
            scaler: model::Scaler {
                mean: vec![0.0; names.len()],
                std: vec![1.0; names.len()],
            },
            config: TrainConfig::default(),
            objective_trace: vec![],
        }
    }

    #[test]
    fn importance_ranking() {
        let m = model_with(&["lex.modal", "cred.urls", "lex.hedges"], &[0.0, -2.0, 0.0]);
        let r = feature_importance(&m);
        assert_eq!(r.dims[0].name, "cred.urls");
        assert_eq!(r.groups[0].group, FeatureGroup::Credibility);
        let names: Vec<&str> = r.top_lexical.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["lex.hedges", "lex.modal"]);

        let zero = feature_importance(&model_with(&["b", "c", "a"], &[0.0; 3]));
        let order: Vec<&str> = zero.dims.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);

        let shuffled = feature_importance(&model_with(&["lex.hedges", "cred.urls", "lex.modal"], &[0.0, -2.0, 0.0]));
        assert_eq!(shuffled, r);
    }

    #[test]
    fn report_text_and_json() {
        let mut report = EvalReport::default();
        report.rows.push(ReportRow {
            section: Section::Baseline,
            key: "baseline.chronological".into(),
            name: "Thread order (chronological)".into(),
            rank: None,
            dims: None,
            scores: Scores {
                map: Some(63.7512),
                ..Scores::default()
            },
            published: None,
        });
        report.attach_published();
        let text = report.render_text();
        assert!(text.contains("---"));
        assert!(text.contains("63.75"));
        let json = report.to_json().unwrap();
        assert_eq!(EvalReport::from_json(&json).unwrap(), report);
    }

    #[test]
    fn ensemble_on_toy_picks_signal() {
        let (threads, table) = toy();
        let data = EvalData::from_threads(&threads);
        let plan = FoldPlan::from_data(&data);
        let (e, row) = evaluate_ensemble(
            &table,
            &[FeatureGroup::Lexical, FeatureGroup::Credibility],
            EnsembleObjective::Accuracy,
            &data,
            &plan,
            &TrainConfig::default(),
        )
        .unwrap();
        assert_eq!(e.selected[0], FeatureGroup::Lexical);
        assert_eq!(row.scores.accuracy, Some(100.0));
    }
}
