//! Tokenization, sentence splitting, coarse word classes, n-grams and
//! TF-IDF weighting shared by every text feature.
//!
//! Token rules, tried in order at each position:
//! URL (`http(s)://`, `www.`), e-mail, phone number (at least 5 digits,
//! allowing `-`, spaces and parentheses), smiley from the inventory, clock
//! time or number, word (letters/digits joined by `'`, `-`, or `.` before a
//! lowercase/digit segment; a trailing possessive `'s` is split off), runs
//! of `!`, `?` or `.` as one token, any other single symbol.
//!
//! A sentence ends after a `.`/`!`/`?` token that is followed by
//! whitespace and a token starting with an uppercase letter, or at the end
//! of the text.

mod ngram;
mod tfidf;
mod wordclass;

use std::collections::HashSet;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub use ngram::{word_ngrams, NgramBag};
pub use tfidf::{SparseVector, TfIdfIndex};
pub use wordclass::{pronoun_person, PronounPerson, WordClass, WordClassLexicon};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Url,
    Email,
    Phone,
    Smiley,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub kind: TokenKind,
    pub word_class: WordClass,
    /// Byte span in the source text.
    pub span: Range<usize>,
}

impl Token {
    /// Every token except punctuation counts as a word of the text.
    pub fn is_word_like(&self) -> bool {
        self.kind != TokenKind::Punct
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenizedText {
    pub tokens: Vec<Token>,
    pub sentences: Vec<Range<usize>>,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Lowercased non-punctuation tokens: the terms used for indexing,
    /// n-grams, embeddings and similarity.
    pub fn terms(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| t.is_word_like())
            .map(|t| t.lower.clone())
            .collect()
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word_like()).count()
    }

    pub fn sentence_tokens(&self, idx: usize) -> &[Token] {
        &self.tokens[self.sentences[idx].clone()]
    }

    /// Surface text of one sentence, tokens joined by single spaces.
    pub fn sentence_text(&self, idx: usize) -> String {
        self.sentence_tokens(idx)
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

struct Patterns {
    url: Regex,
    email: Regex,
    phone: Regex,
    number: Regex,
    word: Regex,
}

impl Patterns {
    fn new() -> Self {
        let re = |s: &str| Regex::new(s).expect("static pattern");
        Patterns {
            url: re(r#"^(?:[hH][tT][tT][pP][sS]?://|[wW][wW][wW]\.)[^\s<>"\[\]{}|]+"#),
            email: re(r"^[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}"),
            phone: re(r"^\+?\(?\d[\d\- ()]*\d"),
            number: re(r"^\d+(?:[.,:]\d+)*"),
            word: re(r"^[\p{L}\p{N}_]+(?:(?:['’\-][\p{L}\p{N}_]+)|(?:\.[\p{Ll}\p{N}][\p{L}\p{N}_]*))*"),
        }
    }
}

/// Tokenizer plus the lexical resources it consults.
pub struct TextProcessor {
    lexicon: WordClassLexicon,
    smileys: Vec<(String, Polarity)>,
    stopwords: HashSet<String>,
    patterns: Patterns,
}

const BUNDLED_WORD_CLASSES: &str = include_str!("../../data/word_classes.tsv");
const BUNDLED_SMILEYS: &str = include_str!("../../data/smileys.tsv");
const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

pub fn parse_smileys(text: &str) -> std::result::Result<Vec<(String, Polarity)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with("# ") {
            continue;
        }
        let (smiley, polarity) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected `smiley<TAB>polarity`", i + 1))?;
        let polarity = match polarity.trim().to_ascii_lowercase().as_str() {
            "positive" => Polarity::Positive,
            "negative" => Polarity::Negative,
            other => return Err(format!("line {}: unknown polarity `{other}`", i + 1)),
        };
        out.push((smiley.to_string(), polarity));
    }
    Ok(out)
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    text.split(['\n', ' ', '\t'])
        .map(|w| w.trim().to_lowercase())
        .filter(|w| !w.is_empty() && !w.starts_with('#'))
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

impl TextProcessor {
    pub fn new(
        lexicon: WordClassLexicon,
        mut smileys: Vec<(String, Polarity)>,
        stopwords: HashSet<String>,
    ) -> Self {
        smileys.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        smileys.dedup_by(|a, b| a.0 == b.0);
        TextProcessor {
            lexicon,
            smileys,
            stopwords,
            patterns: Patterns::new(),
        }
    }

    /// Processor over the bundled word-class lexicon, smileys and stopwords.
    pub fn bundled() -> &'static TextProcessor {
        static SHARED: OnceLock<TextProcessor> = OnceLock::new();
        SHARED.get_or_init(|| {
            TextProcessor::new(
                WordClassLexicon::parse(BUNDLED_WORD_CLASSES).expect("bundled word classes"),
                parse_smileys(BUNDLED_SMILEYS).expect("bundled smileys"),
                parse_word_list(BUNDLED_STOPWORDS).into_iter().collect(),
            )
        })
    }

    pub fn lexicon(&self) -> &WordClassLexicon {
        &self.lexicon
    }

    pub fn smiley_polarity(&self, surface: &str) -> Option<Polarity> {
        self.smileys
            .iter()
            .find(|(s, _)| s == surface)
            .map(|(_, p)| *p)
    }

    pub fn is_stopword(&self, lower: &str) -> bool {
        self.stopwords.contains(lower)
    }

    /// Word-like, non-stopword token containing at least one letter or digit.
    pub fn is_content(&self, token: &Token) -> bool {
        token.is_word_like()
            && !self.is_stopword(&token.lower)
            && token.lower.chars().any(char::is_alphanumeric)
    }

    pub fn word_class(&self, lower: &str) -> WordClass {
        self.lexicon.classify(lower)
    }

    pub fn tokenize(&self, text: &str) -> TokenizedText {
        let mut tokens = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let rest = &text[pos..];
            let ch = rest.chars().next().expect("non-empty");
            if ch.is_whitespace() {
                pos += ch.len_utf8();
                continue;
            }
            let (len, kind) = self.match_token(rest);
            let surface = &rest[..len];
            if kind == TokenKind::Word {
                if let Some(stem) = split_possessive(surface) {
                    tokens.push(self.make_token(stem, TokenKind::Word, pos));
                    let clitic_start = pos + stem.len();
                    tokens.push(self.make_token(
                        &text[clitic_start..pos + len],
                        TokenKind::Word,
                        clitic_start,
                    ));
                    pos += len;
                    continue;
                }
            }
            tokens.push(self.make_token(surface, kind, pos));
            pos += len;
        }
        let sentences = split_sentences(text, &tokens);
        TokenizedText { tokens, sentences }
    }

    fn make_token(&self, surface: &str, kind: TokenKind, start: usize) -> Token {
        let lower = surface.to_lowercase();
        let word_class = match kind {
            TokenKind::Word => self.lexicon.classify(&lower),
            _ => WordClass::Other,
        };
        Token {
            surface: surface.to_string(),
            lower,
            kind,
            word_class,
            span: start..start + surface.len(),
        }
    }

    fn match_token(&self, rest: &str) -> (usize, TokenKind) {
        let p = &self.patterns;
        if let Some(m) = p.url.find(rest) {
            let trimmed = m.as_str().trim_end_matches(['.', ',', ';', ':', '!', '?', ')', '\'']);
            if trimmed.len() > 4 {
                return (trimmed.len(), TokenKind::Url);
            }
        }
        if let Some(m) = p.email.find(rest) {
            return (m.end(), TokenKind::Email);
        }
        if let Some(m) = p.phone.find(rest) {
            let digits = m.as_str().chars().filter(char::is_ascii_digit).count();
            let next_is_alnum = rest[m.end()..].chars().next().is_some_and(char::is_alphanumeric);
            if digits >= 5 && !next_is_alnum {
                return (m.end(), TokenKind::Phone);
            }
        }
        for (smiley, _) in &self.smileys {
            if rest.starts_with(smiley.as_str()) {
                let ends_alnum = smiley.chars().last().is_some_and(char::is_alphanumeric);
                let next_is_alnum = rest[smiley.len()..]
                    .chars()
                    .next()
                    .is_some_and(char::is_alphanumeric);
                let starts_alnum = smiley.chars().next().is_some_and(char::is_alphanumeric);
                if !(ends_alnum && next_is_alnum) && !(starts_alnum && next_is_alnum) {
                    return (smiley.len(), TokenKind::Smiley);
                }
            }
        }
        if let Some(m) = p.number.find(rest) {
            let next_is_letter = rest[m.end()..].chars().next().is_some_and(char::is_alphabetic);
            if !next_is_letter {
                return (m.end(), TokenKind::Number);
            }
        }
        if let Some(m) = p.word.find(rest) {
            return (m.end(), TokenKind::Word);
        }
        let ch = rest.chars().next().expect("non-empty");
        if matches!(ch, '!' | '?' | '.') {
            let run = rest.chars().take_while(|c| *c == ch).count();
            return (run * ch.len_utf8(), TokenKind::Punct);
        }
        (ch.len_utf8(), TokenKind::Punct)
    }
}

fn split_possessive(surface: &str) -> Option<&str> {
    for suffix in ["'s", "’s", "'S", "’S"] {
        if let Some(stem) = surface.strip_suffix(suffix) {
            if !stem.is_empty() {
                return Some(stem);
            }
        }
    }
    None
}

fn is_terminator(token: &Token) -> bool {
    token.kind == TokenKind::Punct && token.surface.chars().all(|c| matches!(c, '.' | '!' | '?'))
}

fn split_sentences(text: &str, tokens: &[Token]) -> Vec<Range<usize>> {
    let mut sentences = Vec::new();
    let mut start = 0;
    for i in 0..tokens.len() {
        let last = i + 1 == tokens.len();
        let boundary = last || {
            let next = &tokens[i + 1];
            is_terminator(&tokens[i])
                && text[tokens[i].span.end..next.span.start]
                    .chars()
                    .next()
                    .is_some_and(char::is_whitespace)
                && next.surface.chars().next().is_some_and(char::is_uppercase)
        };
        if boundary {
            sentences.push(start..i + 1);
            start = i + 1;
        }
    }
    sentences
}

/// Tokenizes with the bundled resources.
pub fn tokenize(text: &str) -> TokenizedText {
    TextProcessor::bundled().tokenize(text)
}

/// Word class of a lowercased token under the bundled lexicon.
pub fn word_class(lower: &str) -> WordClass {
    TextProcessor::bundled().word_class(lower)
}

/// Builds a TF-IDF index over tokenized documents.
pub fn build_index<'a>(docs: impl IntoIterator<Item = &'a TokenizedText>) -> Result<TfIdfIndex> {
    TfIdfIndex::build(docs.into_iter().map(|d| d.terms()))
}
