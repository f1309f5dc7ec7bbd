//! Linguistic bias, subjectivity and sentiment cues.
//!
//! For each bias type the feature is the number of cue occurrences in the
//! answer divided by its number of words. Cues may span several tokens;
//! matching is greedy longest-first over the lowercased token sequence and
//! a token belongs to at most one match per bias type, so a multi-word cue
//! counts once.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureVector};
use crate::textproc::{parse_word_list, TokenizedText};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BiasType {
    Factive,
    Assertive,
    Implicative,
    Hedge,
    ReportVerb,
    WikiBias,
    Modal,
    Negation,
    StrongSubj,
    WeakSubj,
    Positive,
    Negative,
}

impl BiasType {
    /// Feature order of the group.
    pub const ALL: [BiasType; 12] = [
        BiasType::Factive,
        BiasType::Assertive,
        BiasType::Implicative,
        BiasType::Hedge,
        BiasType::ReportVerb,
        BiasType::WikiBias,
        BiasType::Modal,
        BiasType::Negation,
        BiasType::StrongSubj,
        BiasType::WeakSubj,
        BiasType::Positive,
        BiasType::Negative,
    ];

    /// Verb classes that get `I/we (+modal) (+adverb) + verb` expansions.
    pub const VERB_CLASSES: [BiasType; 4] = [
        BiasType::Implicative,
        BiasType::Assertive,
        BiasType::Factive,
        BiasType::ReportVerb,
    ];

    pub fn key(self) -> &'static str {
        match self {
            BiasType::Factive => "factive",
            BiasType::Assertive => "assertive",
            BiasType::Implicative => "implicative",
            BiasType::Hedge => "hedge",
            BiasType::ReportVerb => "report_verb",
            BiasType::WikiBias => "wiki_bias",
            BiasType::Modal => "modal",
            BiasType::Negation => "negation",
            BiasType::StrongSubj => "strong_subj",
            BiasType::WeakSubj => "weak_subj",
            BiasType::Positive => "positive",
            BiasType::Negative => "negative",
        }
    }

    pub fn feature_name(self) -> String {
        format!("lex.{}", self.key())
    }

    fn bundled_list(self) -> &'static str {
        match self {
            BiasType::Factive => include_str!("../data/lexicons/factive.txt"),
            BiasType::Assertive => include_str!("../data/lexicons/assertive.txt"),
            BiasType::Implicative => include_str!("../data/lexicons/implicative.txt"),
            BiasType::Hedge => include_str!("../data/lexicons/hedge.txt"),
            BiasType::ReportVerb => include_str!("../data/lexicons/report_verb.txt"),
            BiasType::WikiBias => include_str!("../data/lexicons/wiki_bias.txt"),
            BiasType::Modal => include_str!("../data/lexicons/modal.txt"),
            BiasType::Negation => include_str!("../data/lexicons/negation.txt"),
            BiasType::StrongSubj => include_str!("../data/lexicons/strong_subj.txt"),
            BiasType::WeakSubj => include_str!("../data/lexicons/weak_subj.txt"),
            BiasType::Positive => include_str!("../data/lexicons/positive.txt"),
            BiasType::Negative => include_str!("../data/lexicons/negative.txt"),
        }
    }
}

impl fmt::Display for BiasType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for BiasType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BiasType::ALL
            .into_iter()
            .find(|b| b.key() == s)
            .ok_or_else(|| Error::UnknownBiasType(s.to_string()))
    }
}

const BUNDLED_ADVERBS: &str = include_str!("../data/lexicons/strong_subj_adverbs.txt");
const FIRST_PERSON: [&str; 2] = ["i", "we"];

#[derive(Debug, Clone, Default)]
struct CueTrie {
    children: HashMap<String, CueTrie>,
    terminal: bool,
}

impl CueTrie {
    fn insert(&mut self, cue: &[String]) {
        let mut node = self;
        for tok in cue {
            node = node.children.entry(tok.clone()).or_default();
        }
        node.terminal = true;
    }

    /// Length of the longest cue starting at `tokens[0]`, if any.
    fn longest_match(&self, tokens: &[&str]) -> Option<usize> {
        let mut node = self;
        let mut best = None;
        for (i, tok) in tokens.iter().enumerate() {
            match node.children.get(*tok) {
                Some(next) => {
                    node = next;
                    if node.terminal {
                        best = Some(i + 1);
                    }
                }
                None => break,
            }
        }
        best
    }
}

/// The cues of one bias type.
#[derive(Debug, Clone)]
pub struct BiasLexicon {
    pub bias_type: BiasType,
    cues: BTreeSet<String>,
    trie: CueTrie,
}

impl BiasLexicon {
    pub fn new(bias_type: BiasType, cues: impl IntoIterator<Item = String>) -> Self {
        let mut lex = BiasLexicon {
            bias_type,
            cues: BTreeSet::new(),
            trie: CueTrie::default(),
        };
        for cue in cues {
            lex.add(&cue);
        }
        lex
    }

    /// Adds a cue (whitespace-separated tokens); returns false for duplicates.
    pub fn add(&mut self, cue: &str) -> bool {
        let tokens: Vec<String> = cue.split_whitespace().map(str::to_lowercase).collect();
        if tokens.is_empty() {
            return false;
        }
        let key = tokens.join(" ");
        if !self.cues.insert(key) {
            return false;
        }
        self.trie.insert(&tokens);
        true
    }

    pub fn contains(&self, cue: &str) -> bool {
        self.cues.contains(&cue.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    pub fn single_word_cues(&self) -> impl Iterator<Item = &str> {
        self.cues.iter().filter(|c| !c.contains(' ')).map(String::as_str)
    }

    /// Number of non-overlapping cue matches, longest first.
    pub fn count_matches(&self, tokens: &[&str]) -> usize {
        let mut i = 0;
        let mut count = 0;
        while i < tokens.len() {
            match self.trie.longest_match(&tokens[i..]) {
                Some(len) => {
                    count += 1;
                    i += len;
                }
                None => i += 1,
            }
        }
        count
    }
}

/// All twelve lexicons plus the strong-subjective adverbs used for expansion.
#[derive(Debug, Clone)]
pub struct BiasLexicons {
    lexicons: Vec<BiasLexicon>,
    adverbs: Vec<String>,
}

impl BiasLexicons {
    /// Single-word lists as shipped, before multi-word expansion.
    pub fn bundled_base() -> Self {
        let lexicons = BiasType::ALL
            .iter()
            .map(|b| BiasLexicon::new(*b, parse_word_lines(b.bundled_list())))
            .collect();
        BiasLexicons {
            lexicons,
            adverbs: parse_word_list(BUNDLED_ADVERBS),
        }
    }

    /// Bundled lists with multi-word cues generated.
    pub fn bundled() -> &'static BiasLexicons {
        static SHARED: OnceLock<BiasLexicons> = OnceLock::new();
        SHARED.get_or_init(|| {
            let mut lex = BiasLexicons::bundled_base();
            lex.expand_multiword_cues();
            lex
        })
    }

    /// Reads `<type>.txt` for every bias type (one cue per line) and the
    /// optional `strong_subj_adverbs.txt` from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut lexicons = Vec::new();
        for b in BiasType::ALL {
            let path = dir.join(format!("{}.txt", b.key()));
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let lex = BiasLexicon::new(b, parse_word_lines(&text));
            if lex.is_empty() {
                return Err(Error::Config(format!("lexicon {} is empty", path.display())));
            }
            lexicons.push(lex);
        }
        let adv_path = dir.join("strong_subj_adverbs.txt");
        let adverbs = if adv_path.exists() {
            let text = std::fs::read_to_string(&adv_path).map_err(|e| Error::io(&adv_path, e))?;
            parse_word_list(&text)
        } else {
            Vec::new()
        };
        Ok(BiasLexicons { lexicons, adverbs })
    }

    pub fn from_lexicons(lexicons: Vec<BiasLexicon>, adverbs: Vec<String>) -> Result<Self> {
        let mut ordered = Vec::new();
        for b in BiasType::ALL {
            let lex = lexicons
                .iter()
                .find(|l| l.bias_type == b)
                .cloned()
                .unwrap_or_else(|| BiasLexicon::new(b, Vec::new()));
            ordered.push(lex);
        }
        Ok(BiasLexicons {
            lexicons: ordered,
            adverbs,
        })
    }

    pub fn lexicon(&self, bias_type: BiasType) -> &BiasLexicon {
        &self.lexicons[bias_type as usize]
    }

    pub fn adverbs(&self) -> &[String] {
        &self.adverbs
    }

    /// Adds `I/we + verb`, `I/we + adverb + verb`, `I/we + modal + verb` and
    /// `I/we + modal + adverb + verb` for every single-word cue of the four
    /// verb classes, filed under the verb's own bias type.
    pub fn expand_multiword_cues(&mut self) {
        let modals: Vec<String> = self
            .lexicon(BiasType::Modal)
            .single_word_cues()
            .map(str::to_string)
            .collect();
        let adverbs = self.adverbs.clone();
        for b in BiasType::VERB_CLASSES {
            let verbs: Vec<String> = self
                .lexicon(b)
                .single_word_cues()
                .map(str::to_string)
                .collect();
            let lex = &mut self.lexicons[b as usize];
            for p in FIRST_PERSON {
                for v in &verbs {
                    lex.add(&format!("{p} {v}"));
                    for a in &adverbs {
                        lex.add(&format!("{p} {a} {v}"));
                    }
                    for m in &modals {
                        lex.add(&format!("{p} {m} {v}"));
                        for a in &adverbs {
                            lex.add(&format!("{p} {m} {a} {v}"));
                        }
                    }
                }
            }
        }
    }

    /// Cue occurrences over word count; 0 for texts without words.
    pub fn bias_score(&self, bias_type: BiasType, text: &TokenizedText) -> f64 {
        let words = text.word_count();
        if words == 0 {
            return 0.0;
        }
        let lowered: Vec<&str> = text.tokens.iter().map(|t| t.lower.as_str()).collect();
        let count = self.lexicon(bias_type).count_matches(&lowered);
        count as f64 / words as f64
    }

    pub fn bias_score_named(&self, bias_type: &str, text: &TokenizedText) -> Result<f64> {
        Ok(self.bias_score(bias_type.parse()?, text))
    }

    pub fn extract(&self, text: &TokenizedText) -> FeatureVector {
        let mut out = FeatureVector::with_capacity(BiasType::ALL.len());
        for b in BiasType::ALL {
            out.push(FeatureGroup::Lexical, b.feature_name(), self.bias_score(b, text));
        }
        out
    }
}

/// One cue per line; `#` lines are comments; duplicates dropped.
fn parse_word_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Lexical feature group with the bundled lexicons.
pub fn extract_lexfeat(text: &TokenizedText) -> FeatureVector {
    BiasLexicons::bundled().extract(text)
}
