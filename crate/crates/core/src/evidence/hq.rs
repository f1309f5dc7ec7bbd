//! Evidence from high-quality posts by trusted authors.
//!
//! Posts are split into sentences and indexed with TF-IDF. Retrieval takes
//! the `k` sentences most similar to the query (similarity order, R2); each
//! is scored by how well it entails the answer and the list is re-sorted by
//! that score (entailment order, R1).
//!
//! Entailment is IDF-weighted lexical coverage: the IDF mass of the
//! hypothesis's distinct content words that also occur in the text, over
//! the IDF mass of all of them.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Thread;
use crate::error::Result;
use crate::features::{FeatureGroup, FeatureVector};
use crate::textproc::{tokenize, SparseVector, TextProcessor, TfIdfIndex, TokenizedText};

pub const HQ_SLOTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HqPost {
    pub id: String,
    pub author: String,
    pub text: String,
}

impl HqPost {
    /// Questions and answers of `threads` written by one of `trusted`.
    pub fn from_threads(threads: &[Thread], trusted: &BTreeSet<String>) -> Vec<HqPost> {
        let mut out = Vec::new();
        for t in threads {
            if trusted.contains(&t.question.user_id) {
                out.push(HqPost {
                    id: t.question.id.clone(),
                    author: t.question.user_id.clone(),
                    text: t.question.full_text(),
                });
            }
            for a in &t.answers {
                if trusted.contains(&a.user_id) {
                    out.push(HqPost {
                        id: a.id.clone(),
                        author: a.user_id.clone(),
                        text: a.body.clone(),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct HqSentence {
    post_id: String,
    /// 1-based position in the post.
    sentence_id: usize,
    text: String,
    terms: Vec<String>,
    content: HashSet<String>,
    vector: SparseVector,
}

/// Sentence-level index over the high-quality posts.
#[derive(Debug, Clone)]
pub struct HqIndex {
    sentences: Vec<HqSentence>,
    index: Option<TfIdfIndex>,
}

fn content_set(text: &TokenizedText) -> HashSet<String> {
    let p = TextProcessor::bundled();
    text.tokens
        .iter()
        .filter(|t| p.is_content(t))
        .map(|t| t.lower.clone())
        .collect()
}

impl HqIndex {
    pub fn build(posts: &[HqPost]) -> Result<Self> {
        let mut sentences = Vec::new();
        for post in posts {
            let tok = tokenize(&post.text);
            for i in 0..tok.sentences.len() {
                let slice = TokenizedText {
                    tokens: tok.sentence_tokens(i).to_vec(),
                    sentences: vec![0..tok.sentences[i].len()],
                };
                let terms = slice.terms();
                if terms.is_empty() {
                    continue;
                }
                sentences.push(HqSentence {
                    post_id: post.id.clone(),
                    sentence_id: i + 1,
                    text: tok.sentence_text(i),
                    content: content_set(&slice),
                    terms,
                    vector: SparseVector::default(),
                });
            }
        }
        if sentences.is_empty() {
            return Ok(HqIndex {
                sentences,
                index: None,
            });
        }
        let index = TfIdfIndex::build(sentences.iter().map(|s| s.terms.as_slice()))?;
        for s in &mut sentences {
            s.vector = index.vectorize(&s.terms);
        }
        Ok(HqIndex {
            sentences,
            index: Some(index),
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn tfidf(&self) -> Option<&TfIdfIndex> {
        self.index.as_ref()
    }
}

/// IDF-weighted coverage of the hypothesis's content words by the text.
pub fn entailment_score(text: &TokenizedText, hypothesis: &TokenizedText, index: &TfIdfIndex) -> f64 {
    coverage(&content_set(text), &content_set(hypothesis), index)
}

fn coverage(text: &HashSet<String>, hypothesis: &HashSet<String>, index: &TfIdfIndex) -> f64 {
    let mut words: Vec<&String> = hypothesis.iter().collect();
    words.sort();
    let (mut covered, mut total) = (0.0, 0.0);
    for w in words {
        let idf = index.idf(w);
        total += idf;
        if text.contains(w) {
            covered += idf;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        covered / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceMatch {
    pub post_id: String,
    pub sentence_id: usize,
    pub sentence: String,
    pub retrieval_cosine: f64,
    pub entailment_score: f64,
    /// Rank by entailment (R1).
    pub rank_by_entailment: usize,
    /// Rank by similarity to the query (R2).
    pub rank_by_similarity: usize,
}

/// Top-`k` sentences for the query words, returned in R1 order with both
/// ranks filled in. Similarity ties go to the earlier post and sentence;
/// entailment ties keep similarity order.
pub fn retrieve_hq_evidence(query_words: &[String], answer: &TokenizedText, hq: &HqIndex, k: usize) -> Vec<EvidenceMatch> {
    let Some(index) = hq.index.as_ref() else {
        return Vec::new();
    };
    let qv = index.vectorize(query_words);
    let mut scored: Vec<(f64, usize)> = hq
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| (qv.cosine(&s.vector), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    let hypothesis = content_set(answer);
    let mut matches: Vec<EvidenceMatch> = scored
        .into_iter()
        .enumerate()
        .map(|(r2, (cos, i))| {
            let s = &hq.sentences[i];
            EvidenceMatch {
                post_id: s.post_id.clone(),
                sentence_id: s.sentence_id,
                sentence: s.text.clone(),
                retrieval_cosine: cos,
                entailment_score: coverage(&s.content, &hypothesis, index),
                rank_by_entailment: 0,
                rank_by_similarity: r2 + 1,
            }
        })
        .collect();
    matches.sort_by(|a, b| {
        b.entailment_score
            .total_cmp(&a.entailment_score)
            .then(a.rank_by_similarity.cmp(&b.rank_by_similarity))
    });
    for (r1, m) in matches.iter_mut().enumerate() {
        m.rank_by_entailment = r1 + 1;
    }
    matches
}

/// Configurations of the high-quality-post pipeline: with or without query
/// generation, with or without entailment re-ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HqVariant {
    /// Generated query, re-ranked.
    S1,
    /// Generated query, similarity order.
    S2,
    /// Whole answer as query, re-ranked.
    S3,
    /// Whole answer as query, similarity order.
    S4,
}

impl HqVariant {
    pub const ALL: [HqVariant; 4] = [HqVariant::S1, HqVariant::S2, HqVariant::S3, HqVariant::S4];

    pub fn reranks(self) -> bool {
        matches!(self, HqVariant::S1 | HqVariant::S3)
    }

    pub fn generated_query(self) -> bool {
        matches!(self, HqVariant::S1 | HqVariant::S2)
    }

    pub fn description(self) -> &'static str {
        match self {
            HqVariant::S1 => "query generation + entailment re-ranking",
            HqVariant::S2 => "query generation, no re-ranking",
            HqVariant::S3 => "answer as query + entailment re-ranking",
            HqVariant::S4 => "answer as query, no re-ranking",
        }
    }
}

/// Five entailment scores (R1 order when re-ranking, R2 order otherwise)
/// followed by five retrieval cosines in R2 order, zero-padded.
pub fn extract_hq_support(matches: &[EvidenceMatch], rerank: bool) -> FeatureVector {
    let mut by_r2: Vec<&EvidenceMatch> = matches.iter().collect();
    by_r2.sort_by_key(|m| m.rank_by_similarity);
    let mut by_r1: Vec<&EvidenceMatch> = matches.iter().collect();
    by_r1.sort_by_key(|m| m.rank_by_entailment);
    let entail_order = if rerank { &by_r1 } else { &by_r2 };
    let mut out = FeatureVector::with_capacity(2 * HQ_SLOTS);
    for i in 0..HQ_SLOTS {
        let v = entail_order.get(i).map_or(0.0, |m| m.entailment_score);
        out.push(FeatureGroup::HqSupport, format!("hq.entail.{}", i + 1), v);
    }
    for i in 0..HQ_SLOTS {
        let v = by_r2.get(i).map_or(0.0, |m| m.retrieval_cosine);
        out.push(FeatureGroup::HqSupport, format!("hq.cos.{}", i + 1), v);
    }
    out
}
