//! Similarity measures and the evidence feature groups: support from web
//! search results, from the whole forum, from the answer's own thread and
//! from high-quality forum posts.
//!
//! Three similarities are computed between a side of the Q&A pair and a
//! piece of evidence: TF-IDF cosine, cosine of averaged embeddings (clamped
//! to [0, 1]) and trigram containment of the side in the evidence. Pages
//! are compared through rolling windows of three consecutive sentences and
//! summarised by the mean and maximum window score.
//!
//! Web layout, outermost axis first: source type (reputed, forum, other),
//! side (question, answer, both), similarity, view (snippet, page mean,
//! page max), aggregation over results (max, mean). The forum layout drops
//! the source axis.

mod hq;

use serde::{Deserialize, Serialize};

use crate::corpus::{Goodness, Thread};
use crate::embfeat::{dense_cosine, EmbeddingSpace, EmbeddingSpaces};
use crate::features::{FeatureGroup, FeatureVector};
use crate::retrieval::{SearchResult, SourceType};
use crate::textproc::{tokenize, word_ngrams, NgramBag, SparseVector, TfIdfIndex, TokenizedText};

pub use hq::{
    entailment_score, extract_hq_support, retrieve_hq_evidence, EvidenceMatch, HqIndex, HqPost,
    HqVariant, HQ_SLOTS,
};

pub const SIDES: [&str; 3] = ["q", "a", "qa"];
pub const SIMS: [&str; 3] = ["costfidf", "cosemb", "contain"];
pub const VIEWS: [&str; 3] = ["snippet", "page_avg", "page_max"];
pub const AGGS: [&str; 2] = ["maxres", "avgres"];
const PER_RESULT: usize = 27;

/// Vector-space forms of one text.
#[derive(Debug, Clone)]
pub struct TextRep {
    pub terms: Vec<String>,
    pub tfidf: SparseVector,
    pub emb: Option<Vec<f64>>,
    trigrams: NgramBag,
    unigrams: NgramBag,
}

/// Shared resources for similarity: the TF-IDF index and the embedding
/// space used for the embedding cosine (if any).
#[derive(Clone, Copy)]
pub struct SimContext<'a> {
    pub index: &'a TfIdfIndex,
    pub space: Option<&'a EmbeddingSpace>,
}

impl<'a> SimContext<'a> {
    pub fn new(index: &'a TfIdfIndex, spaces: &'a EmbeddingSpaces) -> Self {
        SimContext {
            index,
            space: spaces.domain.as_ref().or(spaces.general.as_ref()),
        }
    }

    pub fn rep(&self, terms: Vec<String>) -> TextRep {
        TextRep {
            tfidf: self.index.vectorize(&terms),
            emb: self.space.map(|s| s.avg_vector(&terms)),
            trigrams: word_ngrams(&terms, 3).expect("order 3"),
            unigrams: word_ngrams(&terms, 1).expect("order 1"),
            terms,
        }
    }

    pub fn rep_text(&self, text: &str) -> TextRep {
        self.rep(tokenize(text).terms())
    }

    /// `[tfidf cosine, embedding cosine, containment of a in b]`.
    pub fn sims(&self, a: &TextRep, b: &TextRep) -> [f64; 3] {
        let emb = match (&a.emb, &b.emb) {
            (Some(x), Some(y)) => dense_cosine(x, y).max(0.0),
            _ => 0.0,
        };
        [a.tfidf.cosine(&b.tfidf), emb, containment_bags(a, b)]
    }
}

fn containment_bags(a: &TextRep, b: &TextRep) -> f64 {
    let (ga, gb) = if a.terms.len() >= 3 {
        (&a.trigrams, &b.trigrams)
    } else {
        (&a.unigrams, &b.unigrams)
    };
    if ga.is_empty() {
        return 0.0;
    }
    ga.intersection_size(gb) as f64 / ga.total() as f64
}

/// Share of `a`'s word trigrams (unigrams when `a` has fewer than three
/// words) that also occur in `b`, counted as multisets.
pub fn containment<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    let n = if a.len() >= 3 { 3 } else { 1 };
    let ga = word_ngrams(a, n).expect("positive order");
    let gb = word_ngrams(b, n).expect("positive order");
    if ga.is_empty() {
        return 0.0;
    }
    ga.intersection_size(&gb) as f64 / ga.total() as f64
}

pub fn cosine_tfidf<S: AsRef<str>>(a: &[S], b: &[S], index: &TfIdfIndex) -> f64 {
    index.vectorize(a).cosine(&index.vectorize(b))
}

pub fn cosine_emb<S: AsRef<str>>(a: &[S], b: &[S], space: &EmbeddingSpace) -> f64 {
    dense_cosine(&space.avg_vector(a), &space.avg_vector(b)).max(0.0)
}

/// Rolling three-sentence windows of a page; one window for pages of up to
/// three sentences, none for an empty page.
pub fn triplet_windows(page: &TokenizedText) -> Vec<Vec<String>> {
    let n = page.sentences.len();
    if page.terms().is_empty() {
        return Vec::new();
    }
    let sentence_terms: Vec<Vec<String>> = (0..n)
        .map(|i| {
            page.sentence_tokens(i)
                .iter()
                .filter(|t| t.is_word_like())
                .map(|t| t.lower.clone())
                .collect()
        })
        .collect();
    if n <= 3 {
        return vec![sentence_terms.concat()];
    }
    (0..n - 2).map(|i| sentence_terms[i..i + 3].concat()).collect()
}

/// Mean and maximum of each similarity over the page windows; zeros for an
/// empty page.
pub fn page_profile(ctx: &SimContext, side: &TextRep, windows: &[TextRep]) -> [(f64, f64); 3] {
    let mut out = [(0.0, 0.0); 3];
    if windows.is_empty() {
        return out;
    }
    for w in windows {
        let s = ctx.sims(side, w);
        for k in 0..3 {
            out[k].0 += s[k];
            out[k].1 = f64::max(out[k].1, s[k]);
        }
    }
    for o in &mut out {
        o.0 /= windows.len() as f64;
    }
    out
}

/// The three sides of a Q&A pair.
pub struct QaSides {
    pub q: TextRep,
    pub a: TextRep,
    pub qa: TextRep,
}

impl QaSides {
    pub fn new(ctx: &SimContext, question: &TokenizedText, answer: &TokenizedText) -> Self {
        let q = question.terms();
        let a = answer.terms();
        let qa = [q.clone(), a.clone()].concat();
        QaSides {
            q: ctx.rep(q),
            a: ctx.rep(a),
            qa: ctx.rep(qa),
        }
    }

    fn all(&self) -> [&TextRep; 3] {
        [&self.q, &self.a, &self.qa]
    }
}

/// side × sim × view values for one result.
fn result_values(ctx: &SimContext, sides: &QaSides, result: &SearchResult) -> [f64; PER_RESULT] {
    let snippet = ctx.rep_text(&result.snippet);
    let windows: Vec<TextRep> = result
        .page_text
        .as_deref()
        .map(|p| triplet_windows(&tokenize(p)).into_iter().map(|w| ctx.rep(w)).collect())
        .unwrap_or_default();
    let mut out = [0.0; PER_RESULT];
    for (si, side) in sides.all().into_iter().enumerate() {
        let snip = ctx.sims(side, &snippet);
        let page = page_profile(ctx, side, &windows);
        for k in 0..3 {
            let base = si * 9 + k * 3;
            out[base] = snip[k];
            out[base + 1] = page[k].0;
            out[base + 2] = page[k].1;
        }
    }
    out
}

fn aggregate(rows: &[[f64; PER_RESULT]]) -> [(f64, f64); PER_RESULT] {
    let mut out = [(0.0, 0.0); PER_RESULT];
    if rows.is_empty() {
        return out;
    }
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            o.0 = f64::max(o.0, *v);
            o.1 += v;
        }
    }
    for o in &mut out {
        o.1 /= rows.len() as f64;
    }
    out
}

fn push_block(out: &mut FeatureVector, group: FeatureGroup, prefix: &str, agg: &[(f64, f64); PER_RESULT]) {
    let mut i = 0;
    for side in SIDES {
        for sim in SIMS {
            for view in VIEWS {
                out.push(group, format!("{prefix}.{side}.{sim}.{view}.{}", AGGS[0]), agg[i].0);
                out.push(group, format!("{prefix}.{side}.{sim}.{view}.{}", AGGS[1]), agg[i].1);
                i += 1;
            }
        }
    }
}

/// 162 web-support values from relevant results (at most ten used).
pub fn extract_web_support(ctx: &SimContext, sides: &QaSides, results: &[SearchResult]) -> FeatureVector {
    let used: Vec<&SearchResult> = results.iter().filter(|r| r.relevant).take(10).collect();
    let mut out = FeatureVector::with_capacity(162);
    for st in SourceType::ALL {
        let rows: Vec<[f64; PER_RESULT]> = used
            .iter()
            .filter(|r| r.source_type == st)
            .map(|r| result_values(ctx, sides, r))
            .collect();
        push_block(&mut out, FeatureGroup::WebSupport, &format!("web.{}", st.key()), &aggregate(&rows));
    }
    out
}

/// 54 forum-support values from forum-scoped results (at most ten used).
pub fn extract_forum_support(ctx: &SimContext, sides: &QaSides, results: &[SearchResult]) -> FeatureVector {
    let rows: Vec<[f64; PER_RESULT]> = results
        .iter()
        .take(10)
        .map(|r| result_values(ctx, sides, r))
        .collect();
    let mut out = FeatureVector::with_capacity(54);
    push_block(&mut out, FeatureGroup::ForumSupport, "forum", &aggregate(&rows));
    out
}

/// Names of the thread-support values.
pub const THREAD_FEATURE_NAMES: [&str; 3] = ["thread.cos_general", "thread.cos_domain", "thread.reciprocal_rank"];

/// Cosine between the answer and the centroid of the other Good answers of
/// its thread, in each embedding space, and the reciprocal of the answer's
/// position.
pub fn extract_thread_support(
    thread: &Thread,
    answers: &[TokenizedText],
    answer_idx: usize,
    spaces: &EmbeddingSpaces,
) -> FeatureVector {
    let mut out = FeatureVector::with_capacity(3);
    for (name, space) in THREAD_FEATURE_NAMES[..2].iter().zip([&spaces.general, &spaces.domain]) {
        let value = space.as_ref().map_or(0.0, |s| {
            let others: Vec<Vec<f64>> = thread
                .answers
                .iter()
                .zip(answers)
                .enumerate()
                .filter(|(i, (a, _))| *i != answer_idx && a.goodness == Goodness::Good)
                .map(|(_, (_, t))| s.avg_vector(&t.terms()))
                .collect();
            if others.is_empty() {
                return 0.0;
            }
            let mut centroid = vec![0.0; s.dimension()];
            for v in &others {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / others.len() as f64;
                }
            }
            dense_cosine(&s.avg_vector(&answers[answer_idx].terms()), &centroid).max(0.0)
        });
        out.push(FeatureGroup::ThreadSupport, *name, value);
    }
    let pos = thread.answers[answer_idx].thread_position.max(1);
    out.push(FeatureGroup::ThreadSupport, THREAD_FEATURE_NAMES[2], 1.0 / pos as f64);
    out
}

/// Evidence-side inputs for one answer, produced by retrieval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievedEvidence {
    pub web: Vec<SearchResult>,
    pub forum: Vec<SearchResult>,
}
