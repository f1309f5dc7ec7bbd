use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};

/// Document frequencies over a forum corpus.
///
/// `weight(t, d) = tf(t, d) * ln(1 + N / df(t))`. Terms never seen in the
/// corpus are weighted as if they occurred in exactly one document.
#[derive(Debug, Clone)]
pub struct TfIdfIndex {
    df: HashMap<String, u32>,
    n_docs: usize,
}

impl TfIdfIndex {
    pub fn build<I, D, S>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut df: HashMap<String, u32> = HashMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            let distinct: HashSet<String> =
                doc.into_iter().map(|t| t.as_ref().to_lowercase()).collect();
            for term in distinct {
                *df.entry(term).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(TfIdfIndex { df, n_docs })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn df(&self, term: &str) -> u32 {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn vocabulary_size(&self) -> usize {
        self.df.len()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df(term).max(1) as f64;
        (1.0 + self.n_docs as f64 / df).ln()
    }

    pub fn weight<S: AsRef<str>>(&self, term: &str, doc: &[S]) -> f64 {
        let term = term.to_lowercase();
        let tf = doc.iter().filter(|t| t.as_ref() == term).count();
        tf as f64 * self.idf(&term)
    }

    /// TF-IDF vector of lowercased terms.
    pub fn vectorize<S: AsRef<str>>(&self, terms: &[S]) -> SparseVector {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms {
            *tf.entry(t.as_ref().to_string()).or_default() += 1.0;
        }
        for (term, w) in tf.iter_mut() {
            *w *= self.idf(term);
        }
        SparseVector::from_map(tf)
    }
}

/// Term-keyed sparse vector with a cached norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(String, f64)>,
    norm: f64,
}

impl SparseVector {
    pub fn from_map(map: BTreeMap<String, f64>) -> Self {
        let entries: Vec<(String, f64)> = map.into_iter().filter(|(_, w)| *w != 0.0).collect();
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        SparseVector { entries, norm }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.norm == 0.0
    }

    pub fn get(&self, term: &str) -> f64 {
        self.entries
            .binary_search_by(|(t, _)| t.as_str().cmp(term))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            match self.entries[i].0.cmp(&other.entries[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.entries[i].1 * other.entries[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Cosine in [0, 1]; zero when either vector is zero.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        if self.is_zero() || other.is_zero() {
            return 0.0;
        }
        (self.dot(other) / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}
