//! Surface credibility features.
//!
//! Layout (25 values, in order): URL, image-reference, e-mail and phone
//! counts; token and sentence counts; average tokens per sentence;
//! first/second/third-person pronoun counts; positive and negative smiley
//! counts; runs of one, two and three or more `!`, then the same for `?`;
//! interrogative sentences; noun, verb, adjective, adverb and pronoun
//! counts; words missing from the embedding vocabulary.

use crate::embfeat::EmbeddingSpace;
use crate::features::{FeatureGroup, FeatureVector};
use crate::textproc::{
    pronoun_person, Polarity, PronounPerson, TextProcessor, Token, TokenKind, TokenizedText,
    WordClass,
};

pub const CRED_FEATURE_NAMES: [&str; 25] = [
    "cred.urls",
    "cred.images",
    "cred.emails",
    "cred.phones",
    "cred.tokens",
    "cred.sentences",
    "cred.avg_sentence_tokens",
    "cred.pronouns_1st",
    "cred.pronouns_2nd",
    "cred.pronouns_3rd",
    "cred.smileys_positive",
    "cred.smileys_negative",
    "cred.exclaim_1",
    "cred.exclaim_2",
    "cred.exclaim_3",
    "cred.question_1",
    "cred.question_2",
    "cred.question_3",
    "cred.interrogative_sentences",
    "cred.nouns",
    "cred.verbs",
    "cred.adjectives",
    "cred.adverbs",
    "cred.pronouns",
    "cred.oov_words",
];

const IMAGE_EXTENSIONS: [&str; 5] = [".jpg", ".jpeg", ".png", ".gif", ".bmp"];

fn is_image_file(token: &Token) -> bool {
    matches!(token.kind, TokenKind::Url | TokenKind::Word)
        && IMAGE_EXTENSIONS.iter().any(|ext| token.lower.ends_with(ext))
}

/// `<img` or `[img]` markup.
fn image_tags(tokens: &[Token]) -> usize {
    tokens
        .windows(2)
        .filter(|w| matches!(w[0].surface.as_str(), "<" | "[") && w[1].lower == "img")
        .count()
}

fn run_bucket(token: &Token, ch: char) -> Option<usize> {
    if token.kind != TokenKind::Punct || !token.surface.starts_with(ch) {
        return None;
    }
    let n = token.surface.chars().count();
    Some(n.min(3) - 1)
}

/// Extracts the credibility group. Without a vocabulary the OOV count is 0;
/// callers record that in the run manifest.
pub fn extract_credfeat(text: &TokenizedText, vocabulary: Option<&EmbeddingSpace>) -> FeatureVector {
    let processor = TextProcessor::bundled();
    let mut v = [0.0f64; 25];
    for tok in &text.tokens {
        match tok.kind {
            TokenKind::Url => v[0] += 1.0,
            TokenKind::Email => v[2] += 1.0,
            TokenKind::Phone => v[3] += 1.0,
            TokenKind::Smiley => match processor.smiley_polarity(&tok.surface) {
                Some(Polarity::Positive) => v[10] += 1.0,
                Some(Polarity::Negative) => v[11] += 1.0,
                None => {}
            },
            _ => {}
        }
        if is_image_file(tok) {
            v[1] += 1.0;
        }
        if tok.kind == TokenKind::Word {
            match pronoun_person(&tok.lower) {
                Some(PronounPerson::First) => v[7] += 1.0,
                Some(PronounPerson::Second) => v[8] += 1.0,
                Some(PronounPerson::Third) => v[9] += 1.0,
                None => {}
            }
            match tok.word_class {
                WordClass::Noun => v[19] += 1.0,
                WordClass::Verb => v[20] += 1.0,
                WordClass::Adjective => v[21] += 1.0,
                WordClass::Adverb => v[22] += 1.0,
                WordClass::Pronoun => v[23] += 1.0,
                WordClass::Other => {}
            }
            if let Some(vocab) = vocabulary {
                if !vocab.contains(&tok.lower) {
                    v[24] += 1.0;
                }
            }
        }
        if let Some(b) = run_bucket(tok, '!') {
            v[12 + b] += 1.0;
        }
        if let Some(b) = run_bucket(tok, '?') {
            v[15 + b] += 1.0;
        }
    }
    v[1] += image_tags(&text.tokens) as f64;
    v[4] = text.tokens.len() as f64;
    v[5] = text.sentences.len() as f64;
    v[6] = if text.sentences.is_empty() {
        0.0
    } else {
        v[4] / v[5]
    };
    v[18] = (0..text.sentences.len())
        .filter(|i| {
            text.sentence_tokens(*i)
                .iter()
                .any(|t| t.kind == TokenKind::Punct && t.surface.contains('?'))
        })
        .count() as f64;

    let mut out = FeatureVector::with_capacity(25);
    for (name, value) in CRED_FEATURE_NAMES.iter().zip(v) {
        out.push(FeatureGroup::Credibility, *name, value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::tokenize;
    use proptest::prelude::*;

    #[test]
    fn empty_is_zero() {
        let v = extract_credfeat(&tokenize(""), None);
        assert_eq!(v.len(), 25);
        assert!(v.values().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn surface_counts() {
        let v = extract_credfeat(&tokenize("Call 555-1234!! See http://x.com :)"), None);
        assert_eq!(v.get("cred.phones"), Some(1.0));
        assert_eq!(v.get("cred.urls"), Some(1.0));
        assert_eq!(v.get("cred.exclaim_2"), Some(1.0));
        assert_eq!(v.get("cred.exclaim_1"), Some(0.0));
        assert_eq!(v.get("cred.smileys_positive"), Some(1.0));
        assert_eq!(v.get("cred.smileys_negative"), Some(0.0));
        assert_eq!(v.get("cred.emails"), Some(0.0));
    }

    #[test]
    fn exclamation_runs_are_disjoint() {
        let v = extract_credfeat(&tokenize("Wow!!! Really?? ok!"), None);
        assert_eq!(v.get("cred.exclaim_3"), Some(1.0));
        assert_eq!(v.get("cred.exclaim_2"), Some(0.0));
        assert_eq!(v.get("cred.exclaim_1"), Some(1.0));
        assert_eq!(v.get("cred.question_2"), Some(1.0));
        assert_eq!(v.get("cred.interrogative_sentences"), Some(1.0));
    }

    #[test]
    fn images_pronouns_and_oov() {
        let text = tokenize("I posted pic.jpg and <img src=x> for you. They saw it?");
        let mut vocab = EmbeddingSpace::new("v", 1).unwrap();
        for w in ["i", "posted", "and", "for", "you", "they", "saw", "it"] {
            vocab.insert(w, vec![1.0]).unwrap();
        }
        let v = extract_credfeat(&text, Some(&vocab));
        assert_eq!(v.get("cred.images"), Some(2.0));
        assert_eq!(v.get("cred.pronouns_1st"), Some(1.0));
        assert_eq!(v.get("cred.pronouns_2nd"), Some(1.0));
        assert_eq!(v.get("cred.pronouns_3rd"), Some(2.0));
        assert_eq!(v.get("cred.sentences"), Some(2.0));
        // pic.jpg, img, src, x
        assert_eq!(v.get("cred.oov_words"), Some(4.0));
        assert_eq!(v.get("cred.tokens"), Some(text.len() as f64));
    }

    fn sentences() -> impl Strategy<Value = Vec<String>> {
        let word = prop::sample::select(vec![
            "visa", "you", "they", "good", "quickly", "call", "http://a.com", "55512345", ":)",
            "school", "is", "we",
        ]);
        let end = prop::sample::select(vec![".", "!", "?", "!!", "???"]);
        let sentence = (proptest::collection::vec(word, 1..6), end)
            .prop_map(|(w, e)| format!("Then {}{}", w.join(" "), e));
        proptest::collection::vec(sentence, 1..5)
    }

    proptest! {
        #[test]
        fn invariant_under_sentence_permutation(mut s in sentences()) {
            let a = extract_credfeat(&tokenize(&s.join(" ")), None);
            s.reverse();
            let b = extract_credfeat(&tokenize(&s.join(" ")), None);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn counts_are_non_negative_integers(s in sentences()) {
            let text = tokenize(&s.join(" "));
            let v = extract_credfeat(&text, None);
            for (name, _, x) in v.iter() {
                prop_assert!(x >= 0.0);
                if name != "cred.avg_sentence_tokens" {
                    prop_assert_eq!(x.fract(), 0.0);
                }
            }
            prop_assert_eq!(v.get("cred.tokens"), Some(text.len() as f64));
        }
    }
}
