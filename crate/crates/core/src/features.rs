//! Named, group-tagged feature vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eleven feature groups, each a row of the results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    UserCategories,
    UserQuality,
    UserActivity,
    Lexical,
    Credibility,
    EmbGoogle,
    EmbQl,
    WebSupport,
    ForumSupport,
    ThreadSupport,
    HqSupport,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 11] = [
        FeatureGroup::UserCategories,
        FeatureGroup::UserQuality,
        FeatureGroup::UserActivity,
        FeatureGroup::Lexical,
        FeatureGroup::Credibility,
        FeatureGroup::EmbGoogle,
        FeatureGroup::EmbQl,
        FeatureGroup::WebSupport,
        FeatureGroup::ForumSupport,
        FeatureGroup::ThreadSupport,
        FeatureGroup::HqSupport,
    ];

    pub fn key(self) -> &'static str {
        match self {
            FeatureGroup::UserCategories => "user_categories",
            FeatureGroup::UserQuality => "user_quality",
            FeatureGroup::UserActivity => "user_activity",
            FeatureGroup::Lexical => "lexfeat",
            FeatureGroup::Credibility => "credfeat",
            FeatureGroup::EmbGoogle => "emb_google",
            FeatureGroup::EmbQl => "emb_ql",
            FeatureGroup::WebSupport => "web",
            FeatureGroup::ForumSupport => "forum",
            FeatureGroup::ThreadSupport => "thread",
            FeatureGroup::HqSupport => "hq",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            FeatureGroup::UserCategories => "User posts categories",
            FeatureGroup::UserQuality => "User posts quality",
            FeatureGroup::UserActivity => "User activity",
            FeatureGroup::Lexical => "Linguistic bias, subjectivity and sentiment",
            FeatureGroup::Credibility => "Credibility",
            FeatureGroup::EmbGoogle => "Embeddings (general)",
            FeatureGroup::EmbQl => "Embeddings (forum)",
            FeatureGroup::WebSupport => "Support from the Web",
            FeatureGroup::ForumSupport => "Support from the whole forum",
            FeatureGroup::ThreadSupport => "Support from the current thread",
            FeatureGroup::HqSupport => "Support from high-quality forum posts",
        }
    }

    /// Published accuracy rank of the group; used to break ties.
    pub fn published_rank(self) -> u8 {
        match self {
            FeatureGroup::ForumSupport => 1,
            FeatureGroup::WebSupport => 2,
            FeatureGroup::Lexical => 3,
            FeatureGroup::HqSupport => 4,
            FeatureGroup::EmbQl => 5,
            FeatureGroup::Credibility => 6,
            FeatureGroup::ThreadSupport => 7,
            FeatureGroup::EmbGoogle => 8,
            FeatureGroup::UserActivity => 9,
            FeatureGroup::UserCategories => 10,
            FeatureGroup::UserQuality => 11,
        }
    }

    /// Dimension of the group when its layout is fixed (`None` for the
    /// embedding groups, whose size follows the configured space).
    pub fn fixed_dimension(self) -> Option<usize> {
        match self {
            FeatureGroup::UserCategories => Some(396),
            FeatureGroup::UserQuality => Some(12),
            FeatureGroup::UserActivity => Some(19),
            FeatureGroup::Lexical => Some(12),
            FeatureGroup::Credibility => Some(25),
            FeatureGroup::EmbGoogle | FeatureGroup::EmbQl => None,
            FeatureGroup::WebSupport => Some(162),
            FeatureGroup::ForumSupport => Some(54),
            FeatureGroup::ThreadSupport => Some(3),
            FeatureGroup::HqSupport => Some(10),
        }
    }

    /// Prefix shared by the feature names of the group.
    pub fn name_prefix(self) -> &'static str {
        match self {
            FeatureGroup::UserCategories => "user_cat.",
            FeatureGroup::UserQuality => "user_quality.",
            FeatureGroup::UserActivity => "user_act.",
            FeatureGroup::Lexical => "lex.",
            FeatureGroup::Credibility => "cred.",
            FeatureGroup::EmbGoogle => "emb_google.",
            FeatureGroup::EmbQl => "emb_ql.",
            FeatureGroup::WebSupport => "web.",
            FeatureGroup::ForumSupport => "forum.",
            FeatureGroup::ThreadSupport => "thread.",
            FeatureGroup::HqSupport => "hq.",
        }
    }

    /// Group owning a feature name.
    pub fn of_feature(name: &str) -> Option<FeatureGroup> {
        FeatureGroup::ALL.into_iter().find(|g| name.starts_with(g.name_prefix()))
    }

    /// Groups ordered by published rank.
    pub fn by_published_rank() -> Vec<FeatureGroup> {
        let mut all = Self::ALL.to_vec();
        all.sort_by_key(|g| g.published_rank());
        all
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        FeatureGroup::ALL
            .into_iter()
            .find(|g| g.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown feature group `{s}`")))
    }
}

/// Parses a comma-separated group list. `embfeat` expands to both
/// embedding groups, `all` to every group.
pub fn parse_group_list(spec: &str) -> Result<Vec<FeatureGroup>> {
    let mut out: Vec<FeatureGroup> = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let expanded = match part {
            "embfeat" => vec![FeatureGroup::EmbGoogle, FeatureGroup::EmbQl],
            "all" => FeatureGroup::ALL.to_vec(),
            other => vec![other.parse()?],
        };
        for g in expanded {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    names: Vec<String>,
    groups: Vec<FeatureGroup>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        FeatureVector {
            names: Vec::with_capacity(n),
            groups: Vec::with_capacity(n),
            values: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, group: FeatureGroup, name: impl Into<String>, value: f64) {
        self.names.push(name.into());
        self.groups.push(group);
        self.values.push(value);
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.names.extend(other.names);
        self.groups.extend(other.groups);
        self.values.extend(other.values);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, FeatureGroup, f64)> {
        self.names
            .iter()
            .zip(&self.groups)
            .zip(&self.values)
            .map(|((n, g), v)| (n.as_str(), *g, *v))
    }

    pub fn group_dims(&self, group: FeatureGroup) -> usize {
        self.groups.iter().filter(|g| **g == group).count()
    }

    pub fn select(&self, groups: &[FeatureGroup]) -> FeatureVector {
        let mut out = FeatureVector::new();
        for (n, g, v) in self.iter() {
            if groups.contains(&g) {
                out.push(g, n, v);
            }
        }
        out
    }

    /// Names must be unique; checked when vectors are assembled from parts.
    pub fn check_unique_names(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for n in &self.names {
            if !seen.insert(n.as_str()) {
                return Err(Error::Invalid(format!("duplicate feature name `{n}`")));
            }
        }
        Ok(())
    }
}

/// Feature vectors of many instances with a shared layout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    /// Every vector must have the layout of the first one.
    pub fn from_vectors(ids: Vec<String>, vectors: Vec<FeatureVector>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: vectors.len(),
            });
        }
        let Some(first) = vectors.first() else {
            return Ok(FeatureTable {
                ids,
                ..Default::default()
            });
        };
        first.check_unique_names()?;
        let names = first.names().to_vec();
        let groups = first.groups().to_vec();
        let mut rows = Vec::with_capacity(vectors.len());
        for (id, v) in ids.iter().zip(&vectors) {
            if v.names() != names.as_slice() {
                return Err(Error::Invalid(format!("instance `{id}` has a different feature layout")));
            }
            rows.push(v.values().to_vec());
        }
        Ok(FeatureTable {
            ids,
            names,
            groups,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    /// Groups present, in column order.
    pub fn present_groups(&self) -> Vec<FeatureGroup> {
        let mut out: Vec<FeatureGroup> = Vec::new();
        for g in &self.groups {
            if !out.contains(g) {
                out.push(*g);
            }
        }
        out
    }

    /// Columns of the given groups, in table order.
    pub fn select(&self, groups: &[FeatureGroup]) -> FeatureTable {
        let cols: Vec<usize> = (0..self.names.len())
            .filter(|i| groups.contains(&self.groups[*i]))
            .collect();
        FeatureTable {
            ids: self.ids.clone(),
            names: cols.iter().map(|i| self.names[*i].clone()).collect(),
            groups: cols.iter().map(|i| self.groups[*i]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| cols.iter().map(|i| r[*i]).collect())
                .collect(),
        }
    }

    /// Appends the columns of another table over the same instances.
    pub fn hstack(&mut self, other: &FeatureTable) -> Result<()> {
        if self.ids.is_empty() && self.names.is_empty() {
            *self = other.clone();
            return Ok(());
        }
        if self.ids != other.ids {
            return Err(Error::Invalid("tables cover different instances".into()));
        }
        self.names.extend(other.names.iter().cloned());
        self.groups.extend(other.groups.iter().copied());
        for (r, o) in self.rows.iter_mut().zip(&other.rows) {
            r.extend(o.iter().copied());
        }
        Ok(())
    }

    pub fn vector(&self, row: usize) -> FeatureVector {
        let mut v = FeatureVector::with_capacity(self.names.len());
        for ((n, g), x) in self.names.iter().zip(&self.groups).zip(&self.rows[row]) {
            v.push(*g, n.as_str(), *x);
        }
        v
    }
}
