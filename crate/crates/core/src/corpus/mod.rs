//! Corpus ingestion, train/test splitting and synthetic triple generation.

mod ingest;
pub mod recipes;
pub mod rules;
pub mod synthetic;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ingest::{
    ingest, ingest_reader, parse_jsonl_line, ColumnMap, Corpus, DedupReport, Format, IngestReport,
    LabelPair, LineError, PairLabel, Record,
};
pub use recipes::{
    derive_product_triple, derive_second_third, derive_sentence_triples, fuzzy_order_check,
    item_seed, Generated, InvoiceParams, OrderReport, ProductLexicons, ProductParams, SentenceParams, Skip,
};
pub use rules::{Antonyms, Rule, RuleApplication, Target};
pub use synthetic::{generate_products, product_triples, ProductVocabulary};

use crate::{Error, Result};

/// A generated preference triple of raw strings: `s_j` is meant to be
/// closer to `s` than `s_i` is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub s: String,
    pub s_j: String,
    pub s_i: String,
    pub rules: Vec<RuleApplication>,
    pub seed: u64,
}

impl TripleRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("triple serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

pub fn write_triples(triples: &[TripleRecord]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_json_line());
        out.push('\n');
    }
    out
}

/// Parses a triple JSONL document; blank lines are skipped. The first bad
/// line aborts with its 1-based number.
pub fn read_triples(text: &str) -> Result<Vec<TripleRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            TripleRecord::from_json_line(l)
                .map_err(|e| Error::Malformed(format!("triple line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Number of training items for `n` items: `round(2n / 3)`.
pub fn train_size(n: usize) -> usize {
    (2 * n + 1) / 3
}

/// Seeded shuffle of `0..n`, cut at [`train_size`].
pub fn split_indices(n: usize, seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(train_size(n));
    Split { train: idx, test }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_sizes() {
        assert_eq!(train_size(370), 247);
        assert_eq!(train_size(3), 2);
        assert_eq!(train_size(0), 0);
        let s = split_indices(370, 7);
        assert_eq!((s.train.len(), s.test.len()), (247, 123));
        assert_eq!(split_indices(370, 7), s);
    }

    #[test]
    fn triple_jsonl_roundtrip() {
        let t = TripleRecord {
            s: "a".into(),
            s_j: "b".into(),
            s_i: "c".into(),
            rules: vec![RuleApplication { target: Target::SecondString, rule: Rule::SmallDelta }],
            seed: 3,
        };
        let text = write_triples(&[t.clone(), t.clone()]);
        assert_eq!(read_triples(&text).unwrap(), vec![t.clone(), t]);
        assert!(read_triples("{}\n").is_err());
        assert!(text.contains(r#""rules":[{"target":"s_j","rule":2}]"#));
    }

    proptest! {
        #[test]
        fn split_partitions(n in 0usize..500, seed in any::<u64>()) {
            let s = split_indices(n, seed);
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let exact = 2.0 * n as f64 / 3.0;
            prop_assert!((s.train.len() as f64 - exact).abs() <= 1.0);
        }
    }
}
