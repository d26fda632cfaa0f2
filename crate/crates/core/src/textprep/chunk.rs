use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::quantity::is_unit_word;
use crate::{Error, Result};

const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "into", "is", "it", "of", "on", "or",
    "per", "the", "to", "with", "without", "&", "+", "%",
];

#[derive(Debug, Clone)]
pub struct StopWords(BTreeSet<String>);

impl Default for StopWords {
    fn default() -> Self {
        StopWords(DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect())
    }
}

impl StopWords {
    pub fn empty() -> Self {
        StopWords(BTreeSet::new())
    }

    pub fn insert(&mut self, word: &str) {
        let w = word.trim().to_lowercase();
        if !w.is_empty() {
            self.0.insert(w);
        }
    }

    /// Adds the words of a newline-delimited file to the list.
    pub fn load(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for line in text.lines() {
            self.insert(line);
        }
        Ok(())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

/// A run of content tokens. The head is the first token: product
/// descriptions lead with the item noun ("glycerine white distilled").
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NounPhrase {
    pub tokens: Vec<String>,
}

impl NounPhrase {
    pub fn head(&self) -> &str {
        &self.tokens[0]
    }
}

fn is_content(token: &str, stopwords: &StopWords) -> bool {
    !stopwords.contains(token)
        && !token.chars().any(|c| c.is_ascii_digit() || c.is_numeric())
        && !is_unit_word(token)
        && token.chars().any(char::is_alphabetic)
}

/// Maximal runs of non-stopword, non-numeric, non-unit tokens, deduplicated
/// in order of first appearance.
pub fn noun_phrases(tokens: &[String], stopwords: &StopWords) -> Vec<NounPhrase> {
    let mut phrases: Vec<NounPhrase> = Vec::new();
    let mut run: Vec<String> = Vec::new();
    let flush = |run: &mut Vec<String>, phrases: &mut Vec<NounPhrase>| {
        if !run.is_empty() {
            let np = NounPhrase {
                tokens: std::mem::take(run),
            };
            if !phrases.contains(&np) {
                phrases.push(np);
            }
        }
    };
    for tok in tokens {
        if is_content(tok, stopwords) {
            run.push(tok.clone());
        } else {
            flush(&mut run, &mut phrases);
        }
    }
    flush(&mut run, &mut phrases);
    phrases
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrases(s: &[&str]) -> Vec<String> {
        let toks: Vec<String> = s.iter().map(|t| t.to_string()).collect();
        noun_phrases(&toks, &StopWords::default())
            .into_iter()
            .map(|p| p.tokens.join(" "))
            .collect()
    }

    #[test]
    fn runs_break_on_numbers_units_and_stopwords() {
        assert_eq!(
            phrases(&["tres", "739ml", "cd", "ker", "smooth"]),
            ["tres", "cd ker smooth"]
        );
        assert_eq!(
            phrases(&["analog", "to", "digital", "audio", "5", "lt"]),
            ["analog", "digital audio"]
        );
        assert!(phrases(&["12", "500ml", "x"]).is_empty());
    }

    #[test]
    fn repeated_runs_are_deduplicated() {
        assert_eq!(phrases(&["oil", "2", "oil"]), ["oil"]);
    }
}
