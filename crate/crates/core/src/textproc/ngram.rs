use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Multiset of word n-grams; tokens inside a key are joined by U+001F.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramBag {
    counts: BTreeMap<String, usize>,
    total: usize,
}

impl NgramBag {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, gram: &[&str]) -> usize {
        self.counts.get(&gram.join("\u{1f}")).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Size of the multiset intersection (sum of minimum counts).
    pub fn intersection_size(&self, other: &NgramBag) -> usize {
        self.counts
            .iter()
            .map(|(k, c)| (*c).min(other.counts.get(k).copied().unwrap_or(0)))
            .sum()
    }
}

/// Consecutive n-grams of already-lowercased tokens.
pub fn word_ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> Result<NgramBag> {
    if n == 0 {
        return Err(Error::ZeroNgramOrder);
    }
    let mut bag = NgramBag::default();
    if tokens.len() < n {
        return Ok(bag);
    }
    for window in tokens.windows(n) {
        let key = window
            .iter()
            .map(|t| t.as_ref())
            .collect::<Vec<_>>()
            .join("\u{1f}");
        *bag.counts.entry(key).or_default() += 1;
        bag.total += 1;
    }
    Ok(bag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trigrams_of_four_tokens() {
        let bag = word_ngrams(&["a", "b", "c", "d"], 3).unwrap();
        assert_eq!(bag.total(), 2);
        assert_eq!(bag.count(&["a", "b", "c"]), 1);
        assert_eq!(bag.count(&["b", "c", "d"]), 1);
    }

    #[test]
    fn too_few_tokens() {
        assert!(word_ngrams(&["a"], 3).unwrap().is_empty());
    }

    #[test]
    fn repeated_unigrams() {
        let bag = word_ngrams(&["a", "a"], 1).unwrap();
        assert_eq!(bag.count(&["a"]), 2);
        assert_eq!(bag.distinct(), 1);
    }

    #[test]
    fn zero_order_is_an_error() {
        assert!(matches!(word_ngrams(&["a"], 0), Err(Error::ZeroNgramOrder)));
    }

    proptest! {
        #[test]
        fn ngram_count_formula(tokens in proptest::collection::vec("[a-c]", 0..12), n in 1usize..5) {
            let bag = word_ngrams(&tokens, n).unwrap();
            let expected = (tokens.len() + 1).saturating_sub(n);
            prop_assert_eq!(bag.total(), expected);
        }
    }
}
