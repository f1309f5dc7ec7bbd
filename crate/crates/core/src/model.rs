//! Linear SVM trained in the primal, plus greedy feature-group ensembles.
//!
//! Features are z-scored with training statistics. The objective is
//!
//! ```text
//! F(w, b) = λ/2 (|w|² + b²) + 1/n Σ max(0, 1 - y (w·x̂ + b))
//! ```
//!
//! minimized by Pegasos-style stochastic subgradient steps with step size
//! `1/(λ t)` and projection onto the ball of radius `1/√λ`. At the end of
//! each epoch the running average of the iterates is taken, the output
//! moves towards it by the best step along the joining segment, and the
//! bias is re-solved exactly for the output weights (a one-dimensional
//! convex problem). The objective of the output therefore never increases
//! from one epoch to the next.
//!
//! Training visits instances in a canonical order (sorted by label and
//! feature values) shuffled by a seeded generator, so the result does not
//! depend on the order in which instances are passed in.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureVector};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-3,
            epochs: 50,
            seed: 42,
        }
    }
}

/// Per-dimension training mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Population statistics; a constant dimension gets σ = 1.
    pub fn fit(rows: &[Vec<f64>], dim: usize) -> Scaler {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaler: Scaler,
    pub config: TrainConfig,
    /// Objective of the averaged iterate (with refitted bias) after each epoch.
    pub objective_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Training objective on already-scaled rows.
pub fn objective(rows: &[Vec<f64>], labels: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let n = rows.len() as f64;
    let reg = 0.5 * lambda * (dot(w, w) + b * b);
    let loss: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum();
    reg + loss / n
}

/// A subgradient of [`objective`]; `(∂w, ∂b)`. At a hinge kink the zero
/// branch is taken.
pub fn subgradient(rows: &[Vec<f64>], labels: &[f64], w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64) {
    let n = rows.len() as f64;
    let mut gw: Vec<f64> = w.iter().map(|x| lambda * x).collect();
    let mut gb = lambda * b;
    for (x, y) in rows.iter().zip(labels) {
        if y * (dot(w, x) + b) < 1.0 {
            for (g, xi) in gw.iter_mut().zip(x) {
                *g -= y * xi / n;
            }
            gb -= y / n;
        }
    }
    (gw, gb)
}

/// Exact minimizer over `b` of `λ/2 b² + 1/n Σ max(0, 1 - y (s + b))`.
pub fn refit_bias(scores: &[f64], labels: &[f64], lambda: f64) -> f64 {
    let n = scores.len() as f64;
    // Instance i is inside its hinge when y b < y (y - s), i.e. for b below
    // (y = +1) or above (y = -1) its breakpoint y - s.
    let mut knots: Vec<f64> = scores.iter().zip(labels).map(|(s, y)| y - s).collect();
    knots.sort_by(f64::total_cmp);
    // Left of every knot only the positives are inside their hinge; each
    // knot crossed raises the loss slope by 1/n whatever its label.
    let mut slope = -(labels.iter().filter(|y| **y > 0.0).count() as f64) / n;
    let mut lo = f64::NEG_INFINITY;
    for k in knots {
        let candidate = -slope / lambda;
        if candidate > lo && candidate < k {
            return candidate;
        }
        let right = slope + 1.0 / n;
        if lambda * k + slope <= 0.0 && lambda * k + right >= 0.0 {
            return k;
        }
        slope = right;
        lo = k;
    }
    -slope / lambda
}

impl LinearModel {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Margin on a raw (unscaled) row in `feature_names` order.
    pub fn margin(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: row.len(),
            });
        }
        let scaled = self.scaler.transform(row);
        Ok(dot(&self.weights, &scaled) + self.bias)
    }

    /// Label (Positive iff margin ≥ 0) and margin.
    pub fn predict(&self, row: &[f64]) -> Result<(BinaryLabel, f64)> {
        let m = self.margin(row)?;
        Ok((label_of(m), m))
    }

    /// Prediction joined by feature name, so storage order does not matter.
    pub fn predict_named(&self, fv: &FeatureVector) -> Result<(BinaryLabel, f64)> {
        let index: HashMap<&str, f64> = fv.iter().map(|(n, _, v)| (n, v)).collect();
        let mut row = Vec::with_capacity(self.feature_names.len());
        for name in &self.feature_names {
            match index.get(name.as_str()) {
                Some(v) => row.push(*v),
                None => return Err(Error::UnknownFeature(name.clone())),
            }
        }
        if fv.len() != row.len() {
            return Err(Error::DimensionMismatch {
                expected: row.len(),
                got: fv.len(),
            });
        }
        self.predict(&row)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: LinearModel = serde_json::from_str(&text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Invalid(format!(
                "model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        if model.weights.len() != model.feature_names.len()
            || model.scaler.mean.len() != model.weights.len()
            || model.scaler.std.len() != model.weights.len()
        {
            return Err(Error::Invalid("model arrays have inconsistent lengths".into()));
        }
        Ok(model)
    }
}

pub fn label_of(margin: f64) -> BinaryLabel {
    if margin >= 0.0 {
        BinaryLabel::Positive
    } else {
        BinaryLabel::Negative
    }
}

/// Logistic link on a margin.
pub fn probability(margin: f64) -> f64 {
    1.0 / (1.0 + (-margin).exp())
}

fn canonical_order(rows: &[Vec<f64>], labels: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        labels[a].total_cmp(&labels[b]).then_with(|| {
            rows[a]
                .iter()
                .zip(&rows[b])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    idx
}

/// Step `α ∈ [0, 1]` from the current output towards the latest average
/// minimizing the objective along that segment (golden-section search on
/// a convex function, never worse than staying put).
#[allow(clippy::too_many_arguments)]
fn segment_step(
    s0: &[f64],
    b0: f64,
    s1: &[f64],
    b1: f64,
    y: &[f64],
    w0: &[f64],
    w1: &[f64],
    lambda: f64,
) -> f64 {
    let n = y.len() as f64;
    let d: Vec<f64> = w1.iter().zip(w0).map(|(a, b)| a - b).collect();
    let (uu, ud, dd) = (dot(w0, w0), dot(w0, &d), dot(&d, &d));
    let g = |a: f64| {
        let b = b0 + a * (b1 - b0);
        let reg = 0.5 * lambda * (uu + 2.0 * a * ud + a * a * dd + b * b);
        let loss: f64 = s0
            .iter()
            .zip(s1)
            .zip(y)
            .map(|((p, q), y)| (1.0 - y * (p + a * (q - p) + b)).max(0.0))
            .sum();
        reg + loss / n
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - phi * (hi - lo);
    let mut e = lo + phi * (hi - lo);
    let (mut gc, mut ge) = (g(c), g(e));
    for _ in 0..80 {
        if gc <= ge {
            hi = e;
            e = c;
            ge = gc;
            c = hi - phi * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = e;
            gc = ge;
            e = lo + phi * (hi - lo);
            ge = g(e);
        }
    }
    let mid = 0.5 * (lo + hi);
    [(0.0, g(0.0)), (1.0, g(1.0)), (mid, g(mid))]
        .into_iter()
        .fold((0.0, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
        .0
}

/// Fits a model on raw rows.
pub fn fit(
    rows: &[Vec<f64>],
    labels: &[BinaryLabel],
    feature_names: &[String],
    config: &TrainConfig,
) -> Result<LinearModel> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: labels.len(),
        });
    }
    let dim = feature_names.len();
    for r in rows {
        if r.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
    }
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass);
    }
    if !(config.lambda > 0.0) || config.epochs == 0 {
        return Err(Error::Config("lambda must be positive and epochs at least 1".into()));
    }

    let order = canonical_order(rows, &labels.iter().map(|l| l.sign()).collect::<Vec<_>>());
    let ordered: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
    let scaler = Scaler::fit(&ordered, dim);
    let x: Vec<Vec<f64>> = ordered.iter().map(|r| scaler.transform(r)).collect();
    let y: Vec<f64> = order.iter().map(|&i| labels[i].sign()).collect();
    let n = x.len();
    let lambda = config.lambda;
    let radius = 1.0 / lambda.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut visit: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; dim];
    let mut t: u64 = 0;
    let mut trace = Vec::with_capacity(config.epochs);
    let mut out: Option<(Vec<f64>, f64, Vec<f64>)> = None;

    for _ in 0..config.epochs {
        visit.shuffle(&mut rng);
        for &i in &visit {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let m = y[i] * (dot(&w, &x[i]) + b);
            let shrink = 1.0 - eta * lambda;
            for wj in &mut w {
                *wj *= shrink;
            }
            b *= shrink;
            if m < 1.0 {
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj += eta * y[i] * xj;
                }
                b += eta * y[i];
            }
            let norm = (dot(&w, &w) + b * b).sqrt();
            if norm > radius {
                let s = radius / norm;
                for wj in &mut w {
                    *wj *= s;
                }
                b *= s;
            }
            let a = 1.0 / t as f64;
            for (wa, wj) in w_avg.iter_mut().zip(&w) {
                *wa += (wj - *wa) * a;
            }
        }
        let scores: Vec<f64> = x.iter().map(|r| dot(&w_avg, r)).collect();
        let b_avg = refit_bias(&scores, &y, lambda);
        match &mut out {
            None => out = Some((w_avg.clone(), b_avg, scores)),
            Some((w_out, b_out, s_out)) => {
                let alpha = segment_step(s_out, *b_out, &scores, b_avg, &y, w_out, &w_avg, lambda);
                for (wo, wa) in w_out.iter_mut().zip(&w_avg) {
                    *wo += alpha * (wa - *wo);
                }
                for (so, sa) in s_out.iter_mut().zip(&scores) {
                    *so += alpha * (sa - *so);
                }
                *b_out = refit_bias(s_out, &y, lambda);
            }
        }
        let (w_out, b_out, _) = out.as_ref().expect("set above");
        trace.push(objective(&x, &y, w_out, *b_out, lambda));
    }
    let (weights, bias, _) = out.expect("at least one epoch");

    Ok(LinearModel {
        version: MODEL_FORMAT_VERSION,
        feature_names: feature_names.to_vec(),
        weights,
        bias,
        scaler,
        config: *config,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleObjective {
    Accuracy,
    Map,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub added: FeatureGroup,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub objective: EnsembleObjective,
    pub selected: Vec<FeatureGroup>,
    pub baseline_score: f64,
    pub trace: Vec<SelectionStep>,
}

/// Greedy forward selection. `evaluate` scores a group set (the empty set
/// is the bias-only model); a group is added only on strict improvement,
/// ties going to the better published rank.
pub fn ensemble_select<F>(
    groups: &[FeatureGroup],
    objective: EnsembleObjective,
    mut evaluate: F,
) -> Result<EnsembleConfig>
where
    F: FnMut(&[FeatureGroup]) -> Result<f64>,
{
    let mut candidates: Vec<FeatureGroup> = groups.to_vec();
    candidates.sort_by_key(|g| g.published_rank());
    candidates.dedup();
    let mut selected: Vec<FeatureGroup> = Vec::new();
    let baseline = evaluate(&selected)?;
    let mut best = baseline;
    let mut trace = Vec::new();
    loop {
        let mut round_best: Option<(FeatureGroup, f64)> = None;
        for g in candidates.iter().filter(|g| !selected.contains(g)) {
            let mut trial = selected.clone();
            trial.push(*g);
            let score = evaluate(&trial)?;
            if round_best.map_or(true, |(_, s)| score > s) {
                round_best = Some((*g, score));
            }
        }
        match round_best {
            Some((g, score)) if score > best => {
                selected.push(g);
                best = score;
                trace.push(SelectionStep { added: g, score });
            }
            _ => break,
        }
    }
    Ok(EnsembleConfig {
        objective,
        selected,
        baseline_score: baseline,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    fn separable() -> (Vec<Vec<f64>>, Vec<BinaryLabel>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let t = i as f64;
            rows.push(vec![1.0 + 0.3 * t, 2.0 - 0.1 * t]);
            labels.push(BinaryLabel::Positive);
            rows.push(vec![-1.0 - 0.2 * t, 0.5 * t - 3.0]);
            labels.push(BinaryLabel::Negative);
        }
        (rows, labels)
    }

    fn noisy(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<BinaryLabel>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let shift = if pos { 0.5 } else { -0.5 };
            rows.push((0..d).map(|_| rng.gen_range(-1.0..1.0) + shift).collect());
            labels.push(if pos { BinaryLabel::Positive } else { BinaryLabel::Negative });
        }
        (rows, labels)
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let (rows, labels) = separable();
        assert_eq!(rows.len(), 20);
        let model = fit(&rows, &labels, &names(2), &TrainConfig::default()).unwrap();
        for (r, l) in rows.iter().zip(&labels) {
            assert_eq!(model.predict(r).unwrap().0, *l);
        }
        let (label, _) = model.predict(&[4.0, 1.0]).unwrap();
        assert_eq!(label, BinaryLabel::Positive);
    }

    #[test]
    fn mirror_data_has_zero_bias() {
        let (rows, _) = noisy(7, 30, 4);
        let mut mirrored = Vec::new();
        let mut labels = Vec::new();
        for r in rows {
            mirrored.push(r.iter().map(|x| -x).collect());
            labels.push(BinaryLabel::Negative);
            mirrored.push(r);
            labels.push(BinaryLabel::Positive);
        }
        let model = fit(&mirrored, &labels, &names(4), &TrainConfig::default()).unwrap();
        assert!(model.bias.abs() < 1e-6, "bias {}", model.bias);
    }

    #[test]
    fn single_class_is_rejected() {
        let rows = vec![vec![1.0], vec![2.0]];
        let labels = vec![BinaryLabel::Positive; 2];
        assert!(matches!(
            fit(&rows, &labels, &names(1), &TrainConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn zero_vector_with_zero_bias_is_positive() {
        let model = LinearModel {
            version: MODEL_FORMAT_VERSION,
            feature_names: names(2),
            weights: vec![1.0, -1.0],
            bias: 0.0,
            scaler: Scaler {
                mean: vec![0.0; 2],
                std: vec![1.0; 2],
            },
            config: TrainConfig::default(),
            objective_trace: vec![],
        };
        assert_eq!(model.predict(&[0.0, 0.0]).unwrap(), (BinaryLabel::Positive, 0.0));
        assert!(matches!(
            model.predict(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn named_prediction_ignores_storage_order() {
        let (rows, labels) = noisy(3, 40, 3);
        let model = fit(&rows, &labels, &names(3), &TrainConfig::default()).unwrap();
        let mut fwd = FeatureVector::new();
        let mut rev = FeatureVector::new();
        for i in 0..3 {
            fwd.push(FeatureGroup::Lexical, format!("f{i}"), rows[0][i]);
            rev.push(FeatureGroup::Lexical, format!("f{}", 2 - i), rows[0][2 - i]);
        }
        assert_eq!(model.predict_named(&fwd).unwrap(), model.predict_named(&rev).unwrap());
        assert_eq!(model.predict_named(&fwd).unwrap(), model.predict(&rows[0]).unwrap());
    }

    #[test]
    fn subgradient_matches_finite_differences() {
        let (rows, labels) = noisy(11, 25, 3);
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lambda = 0.1;
        let h = 1e-6;
        for _ in 0..5 {
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: f64 = rng.gen_range(-1.0..1.0);
            let (gw, gb) = subgradient(&rows, &y, &w, b, lambda);
            let mut numeric = Vec::new();
            for j in 0..3 {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                numeric.push(
                    (objective(&rows, &y, &wp, b, lambda) - objective(&rows, &y, &wm, b, lambda)) / (2.0 * h),
                );
            }
            numeric.push(
                (objective(&rows, &y, &w, b + h, lambda) - objective(&rows, &y, &w, b - h, lambda)) / (2.0 * h),
            );
            let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
            assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
        }
    }

    #[test]
    fn bias_refit_is_a_minimizer() {
        let scores = [0.3, -1.2, 2.0, 0.1, -0.4, 0.8];
        let labels = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        for lambda in [1e-3, 0.1, 10.0] {
            let b = refit_bias(&scores, &labels, lambda);
            let f = |b: f64| {
                0.5 * lambda * b * b
                    + scores
                        .iter()
                        .zip(&labels)
                        .map(|(s, y)| (1.0 - y * (s + b)).max(0.0))
                        .sum::<f64>()
                        / 6.0
            };
            for d in [1e-3, 1e-2, 0.5] {
                assert!(f(b) <= f(b + d) + 1e-12);
                assert!(f(b) <= f(b - d) + 1e-12);
            }
        }
    }

    #[test]
    fn objective_trace_is_non_increasing() {
        for seed in 0..6 {
            let (rows, labels) = noisy(seed, 60, 5);
            let model = fit(&rows, &labels, &names(5), &TrainConfig::default()).unwrap();
            for w in model.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-6, "seed {seed}: {:?}", model.objective_trace);
            }
        }
    }

    #[test]
    fn model_round_trips_through_json() {
        let (rows, labels) = separable();
        let model = fit(&rows, &labels, &names(2), &TrainConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        model.save(&path).unwrap();
        assert_eq!(LinearModel::load(&path).unwrap(), model);
    }

    #[test]
    fn scaler_uses_unit_std_for_constants() {
        let s = Scaler::fit(&[vec![1.0, 2.0], vec![1.0, 4.0]], 2);
        assert_eq!(s.std[0], 1.0);
        assert_abs_diff_eq!(s.std[1], 1.0);
        assert_abs_diff_eq!(s.mean[1], 3.0);
    }

    #[test]
    fn ensemble_skips_useless_groups() {
        let score = |gs: &[FeatureGroup]| -> Result<f64> {
            Ok(if gs.contains(&FeatureGroup::Lexical) { 70.0 } else { 50.0 })
        };
        let cfg = ensemble_select(
            &[FeatureGroup::Credibility, FeatureGroup::Lexical],
            EnsembleObjective::Accuracy,
            score,
        )
        .unwrap();
        assert_eq!(cfg.selected, vec![FeatureGroup::Lexical]);
        assert_eq!(cfg.baseline_score, 50.0);

        let none = ensemble_select(&[FeatureGroup::Credibility], EnsembleObjective::Map, |_| Ok(50.0)).unwrap();
        assert!(none.selected.is_empty());
    }

    #[test]
    fn ensemble_ties_follow_published_rank() {
        let cfg = ensemble_select(
            &[FeatureGroup::UserQuality, FeatureGroup::ForumSupport, FeatureGroup::WebSupport],
            EnsembleObjective::Accuracy,
            |gs: &[FeatureGroup]| Ok(if gs.is_empty() { 0.0 } else { 1.0 }),
        )
        .unwrap();
        assert_eq!(cfg.selected, vec![FeatureGroup::ForumSupport]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn input_order_does_not_matter(seed in 0u64..1000, rot in 1usize..20) {
            let (rows, labels) = noisy(seed, 20, 3);
            let a = fit(&rows, &labels, &names(3), &TrainConfig::default()).unwrap();
            let mut r2 = rows.clone();
            let mut l2 = labels.clone();
            r2.rotate_left(rot);
            l2.rotate_left(rot);
            let b = fit(&r2, &l2, &names(3), &TrainConfig::default()).unwrap();
            prop_assert_eq!(a.weights, b.weights);
            prop_assert_eq!(a.bias, b.bias);
        }

        #[test]
        fn label_invariant_under_positive_rescaling(m in -10.0f64..10.0, c in 0.001f64..1000.0) {
            prop_assert_eq!(label_of(m), label_of(m * c));
        }
    }
}
