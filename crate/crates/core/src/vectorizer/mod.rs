//! Tf-idf features over character and word n-grams.
//!
//! Character grams are taken from the space-joined normalized text without
//! boundary padding; word grams from the token list. Weights are
//! `tf * (ln((1 + N) / (1 + df)) + 1)`, then L2-normalized.

mod hashing;
mod sparse;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use hashing::{fnv1a_64, hash_transform, HashingVectorizer};
pub use sparse::SparseVector;

use crate::textprep::Description;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    Char,
    Word,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub analyzer: Analyzer,
    /// Inclusive character n-gram range.
    pub char_range: (usize, usize),
    /// Inclusive word n-gram range.
    pub word_range: (usize, usize),
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self::ranker()
    }
}

impl NgramConfig {
    /// Char 2–5 grams plus word uni- and bigrams.
    pub fn ranker() -> Self {
        NgramConfig {
            analyzer: Analyzer::Both,
            char_range: (2, 5),
            word_range: (1, 2),
        }
    }

    /// Char bi- and trigrams, used for fuzzy retrieval.
    pub fn fuzzy() -> Self {
        Self::chars(2, 3)
    }

    pub fn chars(lo: usize, hi: usize) -> Self {
        NgramConfig {
            analyzer: Analyzer::Char,
            char_range: (lo, hi),
            word_range: (1, 1),
        }
    }

    pub fn words(lo: usize, hi: usize) -> Self {
        NgramConfig {
            analyzer: Analyzer::Word,
            char_range: (1, 1),
            word_range: (lo, hi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi && hi <= 16;
        let uses_chars = self.analyzer != Analyzer::Word;
        let uses_words = self.analyzer != Analyzer::Char;
        if (uses_chars && !ok(self.char_range)) || (uses_words && !ok(self.word_range)) {
            return Err(Error::InvalidParameter(format!("bad n-gram ranges in {self:?}")));
        }
        Ok(())
    }

    /// Feature keys of `desc`, one per occurrence. Character grams are
    /// prefixed `c:` and word grams `w:`.
    pub fn grams(&self, desc: &Description) -> Vec<String> {
        let mut out = Vec::new();
        if self.analyzer != Analyzer::Word {
            let chars: Vec<char> = desc.normalized_text.chars().collect();
            for n in self.char_range.0..=self.char_range.1 {
                for w in chars.windows(n) {
                    let mut key = String::with_capacity(2 + 4 * n);
                    key.push_str("c:");
                    key.extend(w);
                    out.push(key);
                }
            }
        }
        if self.analyzer != Analyzer::Char {
            for n in self.word_range.0..=self.word_range.1 {
                for w in desc.tokens.windows(n) {
                    out.push(format!("w:{}", w.join(" ")));
                }
            }
        }
        out
    }
}

/// Smoothed inverse document frequency.
pub fn idf(n_documents: u32, df: u32) -> f64 {
    ((1.0 + n_documents as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Anything that maps a description to a feature vector of fixed dimension.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, desc: &Description) -> SparseVector;
}

fn term_counts(config: &NgramConfig, desc: &Description) -> HashMap<String, u32> {
    let mut tf = HashMap::new();
    for g in config.grams(desc) {
        *tf.entry(g).or_insert(0) += 1;
    }
    tf
}

/// A fitted gram → feature index map with document frequencies.
///
/// Indices follow lexicographic order of the gram keys, so fitting the same
/// corpus always yields the same vocabulary.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    config: NgramConfig,
    grams: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    idf: Vec<f64>,
    n_documents: u32,
}

const VOCAB_SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabularySnapshot {
    pub v: u32,
    pub config: NgramConfig,
    pub n_documents: u32,
    pub grams: Vec<String>,
    pub df: Vec<u32>,
}

impl Vocabulary {
    pub fn fit<'a, I>(corpus: I, config: NgramConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Description>,
    {
        config.validate()?;
        let mut df: HashMap<String, u32> = HashMap::new();
        let mut n_documents = 0u32;
        for desc in corpus {
            n_documents += 1;
            let distinct: BTreeSet<String> = config.grams(desc).into_iter().collect();
            for g in distinct {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        if n_documents == 0 {
            return Err(Error::EmptyInput("cannot fit a vocabulary on an empty corpus"));
        }
        let mut grams: Vec<(String, u32)> = df.into_iter().collect();
        grams.sort_unstable();
        let (grams, df): (Vec<String>, Vec<u32>) = grams.into_iter().unzip();
        Ok(Self::assemble(config, grams, df, n_documents))
    }

    fn assemble(config: NgramConfig, grams: Vec<String>, df: Vec<u32>, n_documents: u32) -> Self {
        let index = grams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as u32))
            .collect();
        let idf = df.iter().map(|&d| idf(n_documents, d)).collect();
        Vocabulary {
            config,
            grams,
            index,
            df,
            idf,
            n_documents,
        }
    }

    pub fn dim(&self) -> usize {
        self.grams.len()
    }

    pub fn config(&self) -> &NgramConfig {
        &self.config
    }

    pub fn n_documents(&self) -> u32 {
        self.n_documents
    }

    pub fn index_of(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn gram(&self, index: u32) -> &str {
        &self.grams[index as usize]
    }

    pub fn document_frequency(&self, index: u32) -> u32 {
        self.df[index as usize]
    }

    /// Unit-norm tf-idf vector. Grams unseen at fit time are dropped.
    pub fn transform(&self, desc: &Description) -> SparseVector {
        let entries = term_counts(&self.config, desc)
            .into_iter()
            .filter_map(|(g, tf)| {
                let i = *self.index.get(&g)?;
                Some((i, tf as f64 * self.idf[i as usize]))
            })
            .collect();
        SparseVector::from_unsorted(self.dim(), entries).normalized()
    }

    pub fn to_snapshot(&self) -> VocabularySnapshot {
        VocabularySnapshot {
            v: VOCAB_SNAPSHOT_VERSION,
            config: self.config,
            n_documents: self.n_documents,
            grams: self.grams.clone(),
            df: self.df.clone(),
        }
    }

    pub fn from_snapshot(snap: VocabularySnapshot) -> Result<Self> {
        if snap.v != VOCAB_SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported vocabulary version {}", snap.v)));
        }
        snap.config.validate()?;
        if snap.grams.len() != snap.df.len() {
            return Err(Error::Snapshot("gram and df lengths differ".into()));
        }
        if snap.grams.len() > u32::MAX as usize {
            return Err(Error::Snapshot("vocabulary too large".into()));
        }
        if snap.df.iter().any(|&d| d == 0 || d > snap.n_documents) {
            return Err(Error::Snapshot("document frequency out of range".into()));
        }
        if snap.grams.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Snapshot("grams must be sorted and unique".into()));
        }
        Ok(Self::assemble(snap.config, snap.grams, snap.df, snap.n_documents))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }
}

impl Encoder for Vocabulary {
    fn dim(&self) -> usize {
        Vocabulary::dim(self)
    }
    fn encode(&self, desc: &Description) -> SparseVector {
        self.transform(desc)
    }
}

/// Cosine similarity; 0 if either vector is zero.
///
/// Vectors already at unit norm (within 1e-12) are not rescaled, so for
/// encoder output this is exactly the dot product.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> Result<f64> {
    a.check_dim(b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let unit = |n: f64| (n - 1.0).abs() <= 1e-12;
    if unit(na) && unit(nb) {
        return Ok(a.dot(b));
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(texts: &[&str]) -> Vec<Description> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Description::from_text(i.to_string(), t))
            .collect()
    }

    #[test]
    fn single_gram_corpus() {
        let corpus = docs(&["ab"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::chars(2, 2)).unwrap();
        assert_eq!(vocab.dim(), 1);
        assert_eq!(vocab.gram(0), "c:ab");
    }

    #[test]
    fn document_frequency_counts_documents() {
        let corpus = docs(&["abc", "abc"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::chars(2, 2)).unwrap();
        assert_eq!(vocab.dim(), 2);
        for g in ["c:ab", "c:bc"] {
            assert_eq!(vocab.document_frequency(vocab.index_of(g).unwrap()), 2);
        }
    }

    #[test]
    fn hand_computed_weights() {
        // idf(ab) = ln(3/3) + 1 = 1, idf(bc) = ln(3/2) + 1
        let corpus = docs(&["abc", "abd"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::chars(2, 2)).unwrap();
        let v = vocab.transform(&corpus[0]);
        let idf_bc = 1.5f64.ln() + 1.0;
        let norm = (1.0 + idf_bc * idf_bc).sqrt();
        let ab = v.get(vocab.index_of("c:ab").unwrap());
        let bc = v.get(vocab.index_of("c:bc").unwrap());
        assert!((ab - 1.0 / norm).abs() < 1e-12);
        assert!((bc - idf_bc / norm).abs() < 1e-12);
        assert!((ab - 0.580).abs() < 5e-4 && (bc - 0.815).abs() < 5e-4);

        let e_ab = SparseVector::new(vocab.dim(), [(vocab.index_of("c:ab").unwrap(), 1.0)]).unwrap();
        assert!((cosine(&v, &e_ab).unwrap() - ab).abs() < 1e-12);
    }

    #[test]
    fn unseen_grams_give_zero_vector() {
        let corpus = docs(&["abc"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::chars(2, 2)).unwrap();
        let v = vocab.transform(&Description::from_text("q", "xyz"));
        assert!(v.is_zero());
        assert_eq!(cosine(&v, &vocab.transform(&corpus[0])).unwrap(), 0.0);
    }

    #[test]
    fn word_grams_and_empty_corpus() {
        let corpus = docs(&["soft butter", "butter"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::words(1, 2)).unwrap();
        assert!(vocab.index_of("w:soft butter").is_some());
        assert_eq!(vocab.dim(), 3);
        assert!(Vocabulary::fit(&Vec::<Description>::new(), NgramConfig::ranker()).is_err());
    }

    #[test]
    fn cosine_rejects_dim_mismatch() {
        assert!(cosine(&SparseVector::zeros(2), &SparseVector::zeros(3)).is_err());
        let a = SparseVector::from_dense(&[1.0, 0.0]);
        let b = SparseVector::from_dense(&[0.0, 1.0]);
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
        assert_eq!(cosine(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn snapshot_roundtrip_and_validation() {
        let corpus = docs(&["tres 739ml cd ker smooth", "tres soya smooth conditioner"]);
        let vocab = Vocabulary::fit(&corpus, NgramConfig::ranker()).unwrap();
        let back = Vocabulary::from_json(&vocab.to_json()).unwrap();
        assert_eq!(back.transform(&corpus[1]), vocab.transform(&corpus[1]));
        let mut snap = vocab.to_snapshot();
        snap.df[0] = 0;
        assert!(Vocabulary::from_snapshot(snap).is_err());
        assert!(Vocabulary::from_json("{\"v\":9}").is_err());
    }

    #[test]
    fn transform_is_deterministic() {
        let corpus = docs(&["12z dove men us 2in1 frts", "11z dove men us 2in1 frts"]);
        let a = Vocabulary::fit(&corpus, NgramConfig::ranker()).unwrap();
        let b = Vocabulary::fit(&corpus, NgramConfig::ranker()).unwrap();
        assert_eq!(a.transform(&corpus[0]), b.transform(&corpus[0]));
    }

    proptest! {
        #[test]
        fn outputs_are_unit_norm(texts in proptest::collection::vec("[a-e ]{0,12}", 1..6)) {
            let corpus: Vec<Description> = texts.iter().map(|t| Description::from_text("d", t)).collect();
            let vocab = Vocabulary::fit(&corpus, NgramConfig::ranker()).unwrap();
            for d in &corpus {
                let v = vocab.transform(d);
                prop_assert!(v.is_zero() || (v.norm() - 1.0).abs() < 1e-9);
                if !v.is_zero() {
                    prop_assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-9);
                }
                for e in &corpus {
                    let w = vocab.transform(e);
                    prop_assert_eq!(cosine(&v, &w).unwrap(), cosine(&w, &v).unwrap());
                }
            }
        }
    }
}
