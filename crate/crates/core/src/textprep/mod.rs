//! Line-item text normalization.
//!
//! Raw strings are tokenized and lowercased, ill-formed out-of-vocabulary
//! words are corrected against a [`Lexicon`] by edit distance, quantities are
//! canonicalized to base units, and noun phrases are chunked for the
//! head-noun gate used by fuzzy retrieval.

mod chunk;
mod lexicon;
pub mod quantity;
mod tokenize;

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use chunk::{noun_phrases, NounPhrase, StopWords};
pub use lexicon::Lexicon;
pub use quantity::{Quantity, Unit};
pub use tokenize::{tokenize, Token};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Invoice,
    Po,
    Catalog,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDescription {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub source: Source,
}

impl RawDescription {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: Source) -> Self {
        RawDescription {
            id: id.into(),
            text: text.into(),
            source,
        }
    }
}

/// A token rewritten during lexical normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub token_index: usize,
    pub from: String,
    pub to: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub id: String,
    pub original_text: String,
    /// Tokens joined by single spaces.
    pub normalized_text: String,
    pub tokens: Vec<String>,
    /// Character span of each token in `original_text`.
    pub spans: Vec<Range<usize>>,
    pub noun_phrases: Vec<NounPhrase>,
    pub quantities: Vec<Quantity>,
    pub replacements: Vec<Replacement>,
}

impl Description {
    /// Tokenizes `text` without lexical correction. Quantities and noun
    /// phrases (default stopwords) are populated; the token list may be empty.
    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        let toks = tokenize(text);
        let desc = Self::from_tokens(id.into(), text, toks, Vec::new());
        let mut desc = extract_quantities(desc);
        desc.noun_phrases = noun_phrases(&desc.tokens, &StopWords::default());
        desc
    }

    fn from_tokens(
        id: String,
        original: &str,
        toks: Vec<Token>,
        replacements: Vec<Replacement>,
    ) -> Self {
        let (tokens, spans): (Vec<String>, Vec<Range<usize>>) =
            toks.into_iter().map(|t| (t.text, t.span)).unzip();
        Description {
            id,
            original_text: original.to_string(),
            normalized_text: tokens.join(" "),
            tokens,
            spans,
            noun_phrases: Vec::new(),
            quantities: Vec::new(),
            replacements,
        }
    }

    /// Head nouns of all noun phrases.
    pub fn heads(&self) -> BTreeSet<&str> {
        self.noun_phrases.iter().map(NounPhrase::head).collect()
    }

    fn token_list(&self) -> Vec<Token> {
        self.tokens
            .iter()
            .zip(&self.spans)
            .map(|(t, s)| Token {
                text: t.clone(),
                span: s.clone(),
            })
            .collect()
    }
}

/// Edit budget for a token of `len` characters: none below 3, at most one
/// edit for 3–4, `max_edit` from 5 up.
pub fn edit_budget(len: usize, max_edit: usize) -> usize {
    match len {
        0..=2 => 0,
        3..=4 => max_edit.min(1),
        _ => max_edit,
    }
}

/// Tokenizes `raw` and corrects alphabetic out-of-vocabulary tokens to their
/// closest lexicon entry within the edit budget.
pub fn normalize_lexical(raw: &RawDescription, lex: &Lexicon, max_edit: usize) -> Result<Description> {
    if max_edit == 0 {
        return Err(Error::InvalidParameter("max_edit must be at least 1".into()));
    }
    let mut toks = tokenize(&raw.text);
    let mut replacements = Vec::new();
    for (i, tok) in toks.iter_mut().enumerate() {
        if !tok.text.chars().all(char::is_alphabetic) || lex.contains(&tok.text) {
            continue;
        }
        let budget = edit_budget(tok.text.chars().count(), max_edit);
        if budget == 0 {
            continue;
        }
        if let Some((word, distance)) = lex.closest(&tok.text, budget) {
            replacements.push(Replacement {
                token_index: i,
                from: std::mem::replace(&mut tok.text, word.to_string()),
                to: word.to_string(),
                distance,
            });
        }
    }
    if toks.is_empty() {
        return Err(Error::EmptyDescription(raw.id.clone()));
    }
    Ok(Description::from_tokens(
        raw.id.clone(),
        &raw.text,
        toks,
        replacements,
    ))
}

/// Populates `quantities` from the token stream.
pub fn extract_quantities(mut desc: Description) -> Description {
    desc.quantities = quantity::extract(&desc.token_list());
    desc
}

pub fn extract_noun_phrases(desc: &Description, stopwords: &StopWords) -> Vec<NounPhrase> {
    noun_phrases(&desc.tokens, stopwords)
}

/// True iff the two descriptions share at least one head noun. A `false`
/// forces the fuzzy score of the pair to zero.
pub fn noun_phrase_gate(a: &Description, b: &Description) -> bool {
    let heads = a.heads();
    b.noun_phrases.iter().any(|np| heads.contains(np.head()))
}

/// The full normalization pipeline with its lexicon and stopword list.
#[derive(Debug, Clone)]
pub struct Normalizer {
    pub lexicon: Lexicon,
    pub stopwords: StopWords,
    pub max_edit: usize,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer {
            lexicon: Lexicon::new(),
            stopwords: StopWords::default(),
            max_edit: 2,
        }
    }
}

impl Normalizer {
    pub fn new(lexicon: Lexicon) -> Self {
        Normalizer {
            lexicon,
            ..Default::default()
        }
    }

    /// Lexicon built from words seen at least twice in `texts`.
    pub fn from_corpus<'a, I>(texts: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        Self::new(Lexicon::from_texts(texts, 2))
    }

    pub fn normalize(&self, raw: &RawDescription) -> Result<Description> {
        let desc = normalize_lexical(raw, &self.lexicon, self.max_edit)?;
        let mut desc = extract_quantities(desc);
        desc.noun_phrases = extract_noun_phrases(&desc, &self.stopwords);
        Ok(desc)
    }

    pub fn normalize_text(&self, id: &str, text: &str) -> Result<Description> {
        self.normalize(&RawDescription::new(id, text, Source::Invoice))
    }
}
