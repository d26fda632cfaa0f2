use std::collections::BTreeMap;
use std::path::Path;

use super::tokenize::tokenize;
use crate::{Error, Result};

/// In-vocabulary words with corpus frequencies.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    frequency: BTreeMap<String, u64>,
    by_len: BTreeMap<usize, Vec<String>>,
}

fn is_word(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_alphabetic)
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from the alphabetic tokens of `texts` occurring at
    /// least `min_frequency` times.
    pub fn from_texts<'a, I>(texts: I, min_frequency: u64) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for text in texts {
            for tok in tokenize(text) {
                if is_word(&tok.text) {
                    *counts.entry(tok.text).or_default() += 1;
                }
            }
        }
        let mut lex = Lexicon::new();
        for (word, count) in counts {
            if count >= min_frequency.max(1) {
                lex.insert(word, count);
            }
        }
        lex
    }

    /// Adds `word` with `count` occurrences. Non-alphabetic words are ignored.
    pub fn insert(&mut self, word: impl AsRef<str>, count: u64) {
        let word = word.as_ref().to_lowercase();
        if !is_word(&word) || count == 0 {
            return;
        }
        let len = word.chars().count();
        match self.frequency.get_mut(&word) {
            Some(f) => *f += count,
            None => {
                self.by_len.entry(len).or_default().push(word.clone());
                self.frequency.insert(word, count);
            }
        }
    }

    /// Adds user-supplied words; each counts once.
    pub fn extend_words<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for w in words {
            for tok in tokenize(w.as_ref()) {
                self.insert(tok.text, 1);
            }
        }
    }

    /// Reads a newline-delimited word list.
    pub fn load_word_list(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.extend_words(text.lines());
        Ok(())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.frequency.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.frequency.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequency.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.frequency.iter().map(|(w, &f)| (w.as_str(), f))
    }

    /// Closest entry within `max_edit` Damerau-Levenshtein edits.
    ///
    /// Ties on distance go to the more frequent entry, then to the
    /// lexicographically smaller one.
    pub fn closest(&self, word: &str, max_edit: usize) -> Option<(&str, usize)> {
        let len = word.chars().count();
        let mut best: Option<(&str, usize, u64)> = None;
        for (_, bucket) in self
            .by_len
            .range(len.saturating_sub(max_edit)..=len + max_edit)
        {
            for cand in bucket {
                let dist = strsim::damerau_levenshtein(word, cand);
                if dist > max_edit {
                    continue;
                }
                let freq = self.frequency[cand];
                let better = match best {
                    None => true,
                    Some((b, bd, bf)) => {
                        (dist, std::cmp::Reverse(freq), cand.as_str())
                            < (bd, std::cmp::Reverse(bf), b)
                    }
                };
                if better {
                    best = Some((cand.as_str(), dist, freq));
                }
            }
        }
        best.map(|(w, d, _)| (w, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_threshold_drops_rare_words() {
        let lex = Lexicon::from_texts(["soft butter", "butter 5 kg", "tea"], 2);
        assert!(lex.contains("butter"));
        assert!(!lex.contains("soft"));
        assert!(!lex.contains("5"));
        assert_eq!(lex.frequency("butter"), Some(2));
    }

    #[test]
    fn closest_prefers_distance_then_frequency_then_order() {
        let mut lex = Lexicon::new();
        lex.insert("cart", 1);
        lex.insert("card", 5);
        lex.insert("care", 5);
        assert_eq!(lex.closest("carx", 1), Some(("card", 1)));
        lex.insert("carx", 1);
        assert_eq!(lex.closest("carx", 1), Some(("carx", 0)));
        assert_eq!(lex.closest("zzzz", 1), None);
    }

    #[test]
    fn transpositions_cost_one() {
        let mut lex = Lexicon::new();
        lex.insert("glycerine", 3);
        assert_eq!(lex.closest("glycerien", 1), Some(("glycerine", 1)));
    }
}
