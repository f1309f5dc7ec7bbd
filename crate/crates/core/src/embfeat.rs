//! Word-embedding spaces and averaged answer vectors.
//!
//! File format: an optional header line `N D`, then one `token v1 ... vD`
//! line per token. Tokens are lowercased at load; when two entries collapse
//! to the same token the first one wins.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureVector};
use crate::textproc::TokenizedText;

#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    name: String,
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingSpace {
    pub fn new(name: impl Into<String>, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Invalid("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingSpace {
            name: name.into(),
            dimension,
            vectors: HashMap::new(),
        })
    }

    /// Inserts a vector; returns false if the token was already present.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: vector.len(),
            });
        }
        let key = token.to_lowercase();
        if self.vectors.contains_key(&key) {
            return Ok(false);
        }
        self.vectors.insert(key, vector);
        Ok(true)
    }

    pub fn load(path: &Path, name: &str) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file), name, &path.display().to_string())
    }

    pub fn parse<R: BufRead>(reader: R, name: &str, source_name: &str) -> Result<Self> {
        let mut space: Option<EmbeddingSpace> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse {
                source_name: source_name.to_string(),
                line: line_no,
                message,
            };
            if space.is_none() && fields.len() == 2 {
                if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    space = Some(EmbeddingSpace::new(name, d).map_err(|e| perr(e.to_string()))?);
                    continue;
                }
            }
            let values = fields[1..]
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| perr(format!("bad component: {e}")))?;
            let space = match &mut space {
                Some(s) => s,
                None => space.insert(EmbeddingSpace::new(name, values.len()).map_err(|e| perr(e.to_string()))?),
            };
            space.insert(fields[0], values).map_err(|e| perr(e.to_string()))?;
        }
        space.ok_or_else(|| Error::Parse {
            source_name: source_name.to_string(),
            line: 0,
            message: "no vectors".into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors; zero vector if none.
    pub fn avg_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for tok in tokens {
            if let Some(v) = self.vectors.get(tok.as_ref()) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n > 0 {
            for s in &mut sum {
                *s /= n as f64;
            }
        }
        sum
    }
}

/// Cosine of two dense vectors, 0 when either is zero.
pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// The general-purpose and forum-domain spaces; either may be absent.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSpaces {
    pub general: Option<EmbeddingSpace>,
    pub domain: Option<EmbeddingSpace>,
}

impl EmbeddingSpaces {
    pub fn configured(&self) -> impl Iterator<Item = (FeatureGroup, &EmbeddingSpace)> {
        [
            (FeatureGroup::EmbGoogle, self.general.as_ref()),
            (FeatureGroup::EmbQl, self.domain.as_ref()),
        ]
        .into_iter()
        .filter_map(|(g, s)| s.map(|s| (g, s)))
    }

    pub fn missing(&self) -> Vec<FeatureGroup> {
        let mut out = Vec::new();
        if self.general.is_none() {
            out.push(FeatureGroup::EmbGoogle);
        }
        if self.domain.is_none() {
            out.push(FeatureGroup::EmbQl);
        }
        out
    }

    /// Vocabulary for out-of-vocabulary counting: the general space,
    /// falling back to the domain space.
    pub fn oov_vocabulary(&self) -> Option<&EmbeddingSpace> {
        self.general.as_ref().or(self.domain.as_ref())
    }
}

/// Averaged vectors of every configured space, general first.
pub fn extract_embfeat(text: &TokenizedText, spaces: &EmbeddingSpaces) -> FeatureVector {
    let terms = text.terms();
    let mut out = FeatureVector::new();
    for (group, space) in spaces.configured() {
        for (i, v) in space.avg_vector(&terms).into_iter().enumerate() {
            out.push(group, format!("{}.{i}", group.key()), v);
        }
    }
    out
}
