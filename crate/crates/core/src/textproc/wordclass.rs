use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WordClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Pronoun,
    Other,
}

impl WordClass {
    fn parse(s: &str) -> Option<Self> {
        Some(match s.trim().to_ascii_lowercase().as_str() {
            "noun" => WordClass::Noun,
            "verb" => WordClass::Verb,
            "adjective" | "adj" => WordClass::Adjective,
            "adverb" | "adv" => WordClass::Adverb,
            "pronoun" => WordClass::Pronoun,
            "other" => WordClass::Other,
            _ => return None,
        })
    }

    /// Nouns, verbs and adjectives feed query generation.
    pub fn is_query_content(self) -> bool {
        matches!(self, WordClass::Noun | WordClass::Verb | WordClass::Adjective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PronounPerson {
    First,
    Second,
    Third,
}

const FIRST: &[&str] = &["i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves"];
const SECOND: &[&str] = &["you", "your", "yours", "yourself", "yourselves", "u", "ur"];
const THIRD: &[&str] = &[
    "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "they",
    "them", "their", "theirs", "themselves",
];

pub fn pronoun_person(lower: &str) -> Option<PronounPerson> {
    if FIRST.contains(&lower) {
        Some(PronounPerson::First)
    } else if SECOND.contains(&lower) {
        Some(PronounPerson::Second)
    } else if THIRD.contains(&lower) {
        Some(PronounPerson::Third)
    } else {
        None
    }
}

/// Closed pronoun list, then the lexicon, then suffix rules.
#[derive(Debug, Clone, Default)]
pub struct WordClassLexicon {
    entries: HashMap<String, WordClass>,
}

impl WordClassLexicon {
    /// Parses `term<TAB>class` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, class) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected `term<TAB>class`", i + 1))?;
            let class = WordClass::parse(class)
                .ok_or_else(|| format!("line {}: unknown word class `{class}`", i + 1))?;
            entries.entry(term.trim().to_lowercase()).or_insert(class);
        }
        Ok(WordClassLexicon { entries })
    }

    pub fn contains(&self, lower: &str) -> bool {
        self.entries.contains_key(lower) || pronoun_person(lower).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn classify(&self, lower: &str) -> WordClass {
        if pronoun_person(lower).is_some() {
            return WordClass::Pronoun;
        }
        if let Some(class) = self.entries.get(lower) {
            return *class;
        }
        suffix_class(lower)
    }
}

fn suffix_class(lower: &str) -> WordClass {
    if !lower.chars().all(char::is_alphabetic) {
        return WordClass::Other;
    }
    let len = lower.chars().count();
    let rules: [(&str, WordClass); 9] = [
        ("tion", WordClass::Noun),
        ("ness", WordClass::Noun),
        ("ly", WordClass::Adverb),
        ("ize", WordClass::Verb),
        ("ate", WordClass::Verb),
        ("ous", WordClass::Adjective),
        ("ful", WordClass::Adjective),
        ("ive", WordClass::Adjective),
        ("", WordClass::Other),
    ];
    for (suffix, class) in rules {
        // The stem must keep at least three letters ("fly", "date" stay unknown).
        if !suffix.is_empty() && lower.ends_with(suffix) && len >= suffix.len() + 3 {
            return class;
        }
    }
    WordClass::Other
}
