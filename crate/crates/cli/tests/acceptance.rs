//! Acceptance checks, one line per criterion.
//!
//! Criteria that need the released dataset read it from the path in
//! `QLFACT_RELEASED` (converted JSON Lines). Without it they are reported as
//! BLOCKED together with the result of the same check on the sample run.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRunner};
use serde::Deserialize;

use qlfact_core::config::RunConfig;
use qlfact_core::embfeat::EmbeddingSpaces;
use qlfact_core::corpus::{load_dataset, validate_stats, BinaryLabel, Thread};
use qlfact_core::evalkit::{
    calibrate_chronological, chronological_scores, classification_metrics, evaluate_groups, loto_run, map_of_scores,
    run_baselines, ChronoOrder, EvalData, EvalReport, FoldPlan, CHRONOLOGICAL_TARGET_MAP, CHRONOLOGICAL_TOLERANCE,
};
use qlfact_core::evidence::{
    containment, entailment_score, extract_forum_support, extract_web_support, retrieve_hq_evidence, HqIndex, HqPost,
    HqVariant, QaSides, SimContext,
};
use qlfact_core::features::{FeatureGroup, FeatureTable};
use qlfact_core::model::{self, TrainConfig};
use qlfact_core::pipeline::{load_or_compute, FeatureStore, Pipeline};
use qlfact_core::resources::Resources;
use qlfact_core::retrieval::{generate_query, whole_text_query, QueryOrigin, SearchResult, SourceType};
use qlfact_core::textproc::{build_index, tokenize};

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

use Outcome::*;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn sample(file: &str) -> PathBuf {
    root().join("data/sample").join(file)
}

fn released() -> Option<PathBuf> {
    std::env::var_os("QLFACT_RELEASED").map(PathBuf::from).filter(|p| p.exists())
}

fn qlfact(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qlfact"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Config over `dataset` with only the bundled resources.
fn bare_config(dataset: &Path, out: &Path) -> RunConfig {
    let text = format!(
        "seed = 42\noutput_dir = {:?}\n[data]\ndataset = {:?}\n[model]\nlambda = 0.01\nepochs = 20\n",
        s(out),
        s(dataset)
    );
    RunConfig::parse(&text, Path::new("/")).unwrap()
}

fn sample_config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::load(&sample("config.fixtures.toml")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn c1_dataset_fidelity() -> Outcome {
    let run = |path: &Path| -> (bool, String, Duration) {
        let t = Instant::now();
        let o = qlfact(&["validate-data", "--dataset", s(path), "--expect-paper"]);
        let took = t.elapsed();
        let stats = validate_stats(&load_dataset(path).unwrap());
        let per: Vec<usize> = stats.per_label.values().copied().collect();
        let detail = format!(
            "{} questions, {} labelled, {}+/{}-, per label {:?}, {:.2}s",
            stats.n_questions,
            stats.n_annotated_answers,
            stats.n_positive,
            stats.n_negative,
            &per[1..],
            took.as_secs_f64()
        );
        (o.status.success() && took < Duration::from_secs(5), detail, took)
    };
    match released() {
        Some(p) => {
            let (ok, detail, _) = run(&p);
            if ok {
                Pass(detail)
            } else {
                Fail(detail)
            }
        }
        None => {
            let (ok, detail, _) = run(&sample("dataset.jsonl"));
            Blocked(format!(
                "released dataset not provided; sample stand-in {}: {detail}",
                if ok { "passes" } else { "FAILS" }
            ))
        }
    }
}

fn all_positive_row(threads: &[Thread]) -> [f64; 4] {
    let data = EvalData::from_threads(threads);
    let plan = FoldPlan::from_data(&data);
    let rows = run_baselines(&constant_cred_table(&data), &data, &plan, &TrainConfig::default(), ChronoOrder::Ascending)
        .unwrap();
    let r = rows.iter().find(|r| r.key == "baseline.all_positive").unwrap().scores;
    [r.accuracy.unwrap(), r.precision.unwrap(), r.recall.unwrap(), r.f1.unwrap()]
}

/// The credibility baseline needs a table; constant columns are enough for
/// the majority row.
fn constant_cred_table(data: &EvalData) -> FeatureTable {
    let names: Vec<String> = (0..25).map(|i| format!("cred.c{i}")).collect();
    FeatureTable {
        ids: data.ids.clone(),
        groups: vec![FeatureGroup::Credibility; 25],
        rows: vec![vec![0.0; 25]; data.len()],
        names,
    }
}

fn c2_majority_baseline() -> Outcome {
    let published = [51.41, 51.41, 100.00, 67.91];
    let check = |threads: &[Thread]| {
        let got = all_positive_row(threads);
        let ok = got.iter().zip(published).all(|(g, p)| (g - p).abs() <= 0.01 + 1e-9);
        (ok, format!("Acc {:.4} P {:.4} R {:.4} F1 {:.4}", got[0], got[1], got[2], got[3]))
    };
    match released() {
        Some(p) => {
            let (ok, d) = check(&load_dataset(&p).unwrap());
            if ok {
                Pass(d)
            } else {
                Fail(d)
            }
        }
        None => {
            // The row depends only on the label counts, which the sample shares.
            let (ok, d) = check(&load_dataset(&sample("dataset.jsonl")).unwrap());
            if ok {
                Pass(format!("{d} (sample with the published label counts; released dataset not provided)"))
            } else {
                Fail(d)
            }
        }
    }
}

/// Average precision by counting, for each positive, the positives ranked
/// at or above it.
fn brute_force_map(data: &EvalData, scores: &[f64]) -> Option<f64> {
    let mut aps = Vec::new();
    for idx in data.by_thread() {
        let rank = |i: usize| {
            1 + idx
                .iter()
                .filter(|&&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i))
                .count()
        };
        let mut per_positive: Vec<(usize, f64)> = idx
            .iter()
            .filter(|&&i| data.labels[i].is_positive())
            .map(|&i| {
                let r = rank(i);
                let above = idx.iter().filter(|&&j| data.labels[j].is_positive() && rank(j) <= r).count();
                (r, above as f64 / r as f64)
            })
            .collect();
        if per_positive.is_empty() {
            continue;
        }
        per_positive.sort_by_key(|p| p.0);
        let n = per_positive.len() as f64;
        aps.push(per_positive.iter().map(|p| p.1).sum::<f64>() / n);
    }
    (!aps.is_empty()).then(|| 100.0 * aps.iter().sum::<f64>() / aps.len() as f64)
}

fn c3_chronological() -> Outcome {
    let check = |threads: &[Thread]| {
        let data = EvalData::from_threads(threads);
        let c = calibrate_chronological(&data, CHRONOLOGICAL_TARGET_MAP, CHRONOLOGICAL_TOLERANCE);
        let oracle = [ChronoOrder::Ascending, ChronoOrder::Descending]
            .into_iter()
            .all(|o| {
                let sc = chronological_scores(&data, o);
                map_of_scores(&data, &sc).unwrap() == brute_force_map(&data, &sc)
            });
        (
            c.matched,
            oracle,
            format!(
                "ascending {:.2}, descending {:.2}, frozen {:?}, oracle {}",
                c.ascending.unwrap_or(f64::NAN),
                c.descending.unwrap_or(f64::NAN),
                c.chosen,
                if oracle { "equal" } else { "DIFFERENT" }
            ),
        )
    };
    match released() {
        Some(p) => {
            let (matched, oracle, d) = check(&load_dataset(&p).unwrap());
            match (matched, oracle) {
                (true, true) => Pass(d),
                (false, true) => Pass(format!("neither order within 0.5 of 63.75, both values documented: {d}")),
                _ => Fail(d),
            }
        }
        None => {
            let (_, oracle, d) = check(&load_dataset(&sample("dataset.jsonl")).unwrap());
            if oracle {
                Blocked(format!("released dataset not provided; sample: {d}"))
            } else {
                Fail(d)
            }
        }
    }
}

fn c4_headline_substitute() -> Outcome {
    let check = |cfg: &RunConfig| -> (f64, f64) {
        let res = Resources::load(cfg).unwrap();
        let p = Pipeline::new(&res).unwrap();
        let store = FeatureStore::new(&res);
        let groups = [FeatureGroup::Lexical, FeatureGroup::Credibility, FeatureGroup::ThreadSupport];
        let (table, _) = load_or_compute(&p, &store, &groups, false).unwrap();
        let data = EvalData::from_threads(&res.threads);
        let plan = FoldPlan::from_data(&data);
        let train = cfg.train_config();
        let combined = evaluate_groups(&table, &groups, &data, &plan, &train).unwrap();
        let lex = evaluate_groups(&table, &[FeatureGroup::Lexical], &data, &plan, &train).unwrap();
        (combined.accuracy.unwrap(), lex.accuracy.unwrap())
    };
    let out = tempfile::tempdir().unwrap();
    match released() {
        Some(p) => {
            let (acc, lex) = check(&bare_config(&p, out.path()));
            let d = format!("lexfeat+credfeat+thread Acc {acc:.2} vs 51.41; lexfeat {lex:.2} vs published 60.64");
            if acc > 51.41 {
                Pass(d)
            } else {
                Fail(d)
            }
        }
        None => {
            let (acc, lex) = check(&bare_config(&sample("dataset.jsonl"), out.path()));
            Blocked(format!(
                "released dataset not provided; sample: lexfeat+credfeat+thread Acc {acc:.2} vs 51.41, lexfeat {lex:.2} vs published 60.64"
            ))
        }
    }
}

fn c5_metric_oracles() -> Outcome {
    // MAP of out-of-fold margins over all threads of the sample.
    let out = tempfile::tempdir().unwrap();
    let res = Resources::load(&sample_config(out.path())).unwrap();
    let p = Pipeline::new(&res).unwrap();
    let (tables, _) = p.featurize(&[FeatureGroup::Lexical]).unwrap();
    let data = EvalData::from_threads(&res.threads);
    let plan = FoldPlan::from_data(&data);
    let run = loto_run(&tables[0].1, &data, &plan, &res.config.train_config()).unwrap();
    let map = map_of_scores(&data, &run.margins).unwrap();
    let oracle = brute_force_map(&data, &run.margins);
    if map != oracle {
        return Fail(format!("MAP {map:?} vs brute force {oracle:?}"));
    }

    let mut runner = TestRunner::deterministic();
    let sets = vec((any::<bool>(), any::<bool>()), 1..80);
    for case in 0..20 {
        let pairs = sets.new_tree(&mut runner).unwrap().current();
        let lab = |b: bool| if b { BinaryLabel::Positive } else { BinaryLabel::Negative };
        let pred: Vec<BinaryLabel> = pairs.iter().map(|p| lab(p.0)).collect();
        let gold: Vec<BinaryLabel> = pairs.iter().map(|p| lab(p.1)).collect();
        let m = classification_metrics(&pred, &gold).unwrap();
        let tp = pairs.iter().filter(|p| p.0 && p.1).count() as f64;
        let fp = pairs.iter().filter(|p| p.0 && !p.1).count() as f64;
        let fneg = pairs.iter().filter(|p| !p.0 && p.1).count() as f64;
        let tn = pairs.iter().filter(|p| !p.0 && !p.1).count() as f64;
        let acc = (tp + tn) / (tp + tn + fp + fneg);
        let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let rec = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        let f1 = if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
        let expected = [100.0 * acc, 100.0 * prec, 100.0 * rec, 100.0 * f1];
        let got = [m.accuracy, m.precision, m.recall, m.f1];
        if got != expected {
            return Fail(format!("set {case}: {got:?} vs {expected:?}"));
        }
    }
    Pass(format!(
        "MAP {:.4} equals brute force over {} threads; 20 random P/R/F1 sets equal",
        map.unwrap(),
        data.by_thread().len()
    ))
}

fn c6_trainer() -> Outcome {
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let x = (i % 5) as f64 - 2.0;
            let y = (i / 5) as f64 * 0.7 - 1.0;
            let shift = if i % 2 == 0 { 1.5 } else { -1.5 };
            vec![x + shift, y + shift]
        })
        .collect();
    let labels: Vec<BinaryLabel> = (0..20)
        .map(|i| if i % 2 == 0 { BinaryLabel::Positive } else { BinaryLabel::Negative })
        .collect();
    let names = vec!["x".to_string(), "y".to_string()];
    let cfg = TrainConfig {
        lambda: 1e-3,
        epochs: 50,
        seed: 7,
    };
    let m = model::fit(&rows, &labels, &names, &cfg).unwrap();
    let correct = rows
        .iter()
        .zip(&labels)
        .filter(|(r, l)| m.predict(r).unwrap().0 == **l)
        .count();
    let monotone = m.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-6);

    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let mut runner = TestRunner::deterministic();
    let point = vec(-2.0f64..2.0, 3);
    let lambda = 0.1;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let p = point.new_tree(&mut runner).unwrap().current();
        let (w, b) = (vec![p[0], p[1]], p[2]);
        let (gw, gb) = model::subgradient(&rows, &y, &w, b, lambda);
        let f = |w: &[f64], b: f64| model::objective(&rows, &y, w, b, lambda);
        let mut fd = Vec::new();
        for k in 0..2 {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[k] += h;
            down[k] -= h;
            fd.push((f(&up, b) - f(&down, b)) / (2.0 * h));
        }
        fd.push((f(&w, b + h) - f(&w, b - h)) / (2.0 * h));
        let g = [gw[0], gw[1], gb];
        let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(diff / norm);
    }
    let d = format!("train accuracy {correct}/20, objective trace non-increasing: {monotone}, worst gradient rel. error {worst:.2e}");
    if correct == 20 && monotone && worst < 1e-4 {
        Pass(d)
    } else {
        Fail(d)
    }
}

fn c7_dimensions() -> Outcome {
    let out = tempfile::tempdir().unwrap();
    let res = Resources::load(&sample_config(out.path())).unwrap();
    let p = Pipeline::new(&res).unwrap();
    let (tables, _) = p.featurize(&FeatureGroup::ALL).unwrap();
    let general = res.spaces.general.as_ref().unwrap().dimension();
    let domain = res.spaces.domain.as_ref().unwrap().dimension();
    let mut parts = Vec::new();
    let mut ok = true;
    for (g, t) in &tables {
        let expected = match g {
            FeatureGroup::EmbGoogle => general,
            FeatureGroup::EmbQl => domain,
            other => other.fixed_dimension().unwrap(),
        };
        ok &= t.dimension() == expected && t.rows.iter().all(|r| r.len() == expected);
        parts.push(format!("{} {}", g.key(), t.dimension()));
    }
    if ok {
        Pass(parts.join(", "))
    } else {
        Fail(parts.join(", "))
    }
}

#[derive(Deserialize)]
struct RerankCase {
    question: String,
    answer: String,
    correct_post: String,
    posts: Vec<HqPost>,
}

fn c8_reranking() -> Outcome {
    let path = root().join("crates/core/tests/data/hq_rerank.json");
    let case: RerankCase = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let q = tokenize(&case.question);
    let a = tokenize(&case.answer);
    let mut docs = vec![q.clone(), a.clone()];
    docs.extend(case.posts.iter().map(|p| tokenize(&p.text)));
    let index = build_index(&docs).unwrap();
    let hq = HqIndex::build(&case.posts).unwrap();
    let first = |v: HqVariant| {
        let query = if v.generated_query() {
            generate_query(&[&q, &a], QueryOrigin::QaPair, &index).unwrap()
        } else {
            whole_text_query(&a, QueryOrigin::Answer).unwrap()
        };
        let mut m = retrieve_hq_evidence(&query.words(), &a, &hq, 11);
        if !v.reranks() {
            m.sort_by_key(|m| m.rank_by_similarity);
        }
        m.into_iter().next().unwrap()
    };
    let s1 = first(HqVariant::S1);
    let s4 = first(HqVariant::S4);
    let phenomenon = s1.post_id == case.correct_post && s1.rank_by_entailment == 1 && s4.post_id != case.correct_post;

    let out = tempfile::tempdir().unwrap();
    let cfg = sample("config.fixtures.toml");
    let o = qlfact(&["ablate", "-c", s(&cfg), "--output-dir", s(out.path())]);
    if !o.status.success() {
        return Fail(format!("ablate failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let report = EvalReport::from_json(&std::fs::read_to_string(out.path().join("ablation.json")).unwrap()).unwrap();
    let keys: Vec<&str> = report.rows.iter().map(|r| r.key.as_str()).collect();
    let mut distinct: Vec<String> = report.rows.iter().map(|r| format!("{:?}", r.scores)).collect();
    distinct.sort();
    distinct.dedup();

    let t = Instant::now();
    let o = qlfact(&["evaluate", "-c", s(&cfg), "--output-dir", s(out.path())]);
    let took = t.elapsed();
    let d = format!(
        "S1 first: post {} (R1 {}, R2 {}); S4 first: post {}; rows {:?} with {} distinct score sets; full evaluation {:.1}s",
        s1.post_id,
        s1.rank_by_entailment,
        s1.rank_by_similarity,
        s4.post_id,
        keys,
        distinct.len(),
        took.as_secs_f64()
    );
    if phenomenon && keys.len() == 4 && distinct.len() == 4 && o.status.success() && took < Duration::from_secs(300) {
        Pass(d)
    } else {
        Fail(d)
    }
}

fn c9_determinism() -> Outcome {
    let cfg = sample("config.fixtures.toml");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = qlfact(&["evaluate", "-c", s(&cfg), "--expect-paper", "--output-dir", s(d.path())]);
        if !o.status.success() {
            return Fail(String::from_utf8_lossy(&o.stderr).into_owned());
        }
    }
    let files = ["report.txt", "report.json", "model.json", "queries.jsonl", "manifest.evaluate.json"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(dirs[0].path().join(f)).unwrap() != std::fs::read(dirs[1].path().join(f)).unwrap())
        .collect();
    if differing.is_empty() {
        Pass(format!("{} identical across two runs", files.join(", ")))
    } else {
        Fail(format!("differ: {differing:?}"))
    }
}

fn c10_similarity_properties() -> Outcome {
    const WORDS: [&str; 12] = [
        "visa", "permit", "doha", "salary", "school", "french", "bank", "loan", "the", "is", "new", "office",
    ];
    let text = || vec(0..WORDS.len(), 1..25).prop_map(|ix| ix.into_iter().map(|i| WORDS[i]).collect::<Vec<_>>().join(" "));
    let strategy = (text(), text(), text(), vec((text(), text()), 0..4));
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let spaces = EmbeddingSpaces::default();
    let result = runner.run(&strategy, |(a, b, extra, pages)| {
        let ta = tokenize(&a);
        let tb = tokenize(&b);
        let te = tokenize(&format!("{b} {extra}"));
        let idx = build_index([&ta, &tb, &te]).unwrap();
        let (wa, wb) = (ta.terms(), tb.terms());
        let c = containment(&wa, &wb);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(containment(&wa, &wa), 1.0);
        let cos = qlfact_core::evidence::cosine_tfidf(&wa, &wb, &idx);
        prop_assert!((0.0..=1.0).contains(&cos));
        let e = entailment_score(&tb, &ta, &idx);
        let ext = entailment_score(&te, &ta, &idx);
        prop_assert!((0.0..=1.0).contains(&e) && (0.0..=1.0).contains(&ext));
        prop_assert!(ext >= e);

        let ctx = SimContext::new(&idx, &spaces);
        let sides = QaSides::new(&ctx, &tb, &ta);
        let results: Vec<SearchResult> = pages
            .iter()
            .enumerate()
            .map(|(i, (snippet, page))| SearchResult {
                url: format!("https://www.example.com/{i}"),
                snippet: snippet.clone(),
                page_text: Some(page.clone()),
                rank: i as u32 + 1,
                source_type: SourceType::Other,
                relevant: true,
            })
            .collect();
        for fv in [
            extract_web_support(&ctx, &sides, &results),
            extract_forum_support(&ctx, &sides, &results),
        ] {
            let names = fv.names();
            let values = fv.values();
            for (n, v) in names.iter().zip(values) {
                prop_assert!((0.0..=1.0).contains(v), "{} = {}", n, v);
                for (hi, lo) in [("maxres", "avgres"), ("page_max", "page_avg")] {
                    if n.contains(hi) {
                        let partner = n.replace(hi, lo);
                        let j = names.iter().position(|m| *m == partner).unwrap();
                        prop_assert!(*v >= values[j] - 1e-12, "{} < {}", n, partner);
                    }
                }
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => Pass("1000 random cases: ranges, self-containment, monotone entailment, max >= avg".into()),
        Err(e) => Fail(e.to_string()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("dataset fidelity", c1_dataset_fidelity),
        ("majority baseline", c2_majority_baseline),
        ("chronological MAP calibration", c3_chronological),
        ("headline substitute", c4_headline_substitute),
        ("metric oracles", c5_metric_oracles),
        ("trainer soundness", c6_trainer),
        ("feature dimensions", c7_dimensions),
        ("re-ranking phenomenon", c8_reranking),
        ("determinism", c9_determinism),
        ("similarity properties", c10_similarity_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Blocked(d) => ("BLOCKED", d),
        };
        println!("criterion {:>2} {tag:<7} {name}: {detail}", i + 1);
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
