use std::collections::{BTreeSet, HashMap};
use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::{idf, Encoder, NgramConfig, SparseVector};
use crate::textprep::Description;
use crate::{Error, Result};

/// 64-bit FNV-1a over the raw bytes.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

/// Feature hashing into `dim` buckets (a power of two) with sign hashing:
/// the low bits pick the bucket, the top bit the sign.
///
/// After [`fit`](Self::fit) the idf is computed per bucket; unfitted, every
/// bucket has idf 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashingVectorizer {
    config: NgramConfig,
    dim: usize,
    n_documents: u32,
    /// Sparse bucket document frequencies.
    df: Vec<(u32, u32)>,
    #[serde(skip)]
    idf: HashMap<u32, f64>,
}

impl HashingVectorizer {
    pub fn new(config: NgramConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        if dim < 2 || !dim.is_power_of_two() || dim > (1 << 31) {
            return Err(Error::InvalidParameter(format!(
                "hash dimension must be a power of two in [2, 2^31], got {dim}"
            )));
        }
        Ok(HashingVectorizer {
            config,
            dim,
            n_documents: 0,
            df: Vec::new(),
            idf: HashMap::new(),
        })
    }

    pub fn fit<'a, I>(corpus: I, config: NgramConfig, dim: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Description>,
    {
        let mut hv = Self::new(config, dim)?;
        let mut df: HashMap<u32, u32> = HashMap::new();
        for desc in corpus {
            hv.n_documents += 1;
            let buckets: BTreeSet<u32> = config
                .grams(desc)
                .iter()
                .map(|g| hv.bucket(g).0)
                .collect();
            for b in buckets {
                *df.entry(b).or_insert(0) += 1;
            }
        }
        if hv.n_documents == 0 {
            return Err(Error::EmptyInput("cannot fit a hashing vectorizer on an empty corpus"));
        }
        let mut df: Vec<(u32, u32)> = df.into_iter().collect();
        df.sort_unstable();
        hv.df = df;
        hv.rebuild_idf();
        Ok(hv)
    }

    fn rebuild_idf(&mut self) {
        self.idf = self
            .df
            .iter()
            .map(|&(b, d)| (b, idf(self.n_documents, d)))
            .collect();
    }

    fn bucket(&self, key: &str) -> (u32, f64) {
        let h = fnv1a_64(key.as_bytes());
        let bucket = (h & (self.dim as u64 - 1)) as u32;
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        (bucket, sign)
    }

    fn bucket_idf(&self, bucket: u32) -> f64 {
        if self.n_documents == 0 {
            return 1.0;
        }
        self.idf
            .get(&bucket)
            .copied()
            .unwrap_or_else(|| idf(self.n_documents, 0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transform(&self, desc: &Description) -> SparseVector {
        let mut tf: HashMap<&str, u32> = HashMap::new();
        let grams = self.config.grams(desc);
        for g in &grams {
            *tf.entry(g.as_str()).or_insert(0) += 1;
        }
        let entries = tf
            .into_iter()
            .map(|(g, count)| {
                let (b, sign) = self.bucket(g);
                (b, sign * count as f64 * self.bucket_idf(b))
            })
            .collect();
        SparseVector::from_unsorted(self.dim, entries).normalized()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hashing vectorizer serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut hv: HashingVectorizer = serde_json::from_str(text)?;
        let fresh = HashingVectorizer::new(hv.config, hv.dim)?;
        if hv.df.iter().any(|&(b, d)| b as usize >= fresh.dim || d == 0 || d > hv.n_documents)
            || hv.df.windows(2).any(|w| w[0].0 >= w[1].0)
        {
            return Err(Error::Snapshot("invalid bucket frequencies".into()));
        }
        hv.rebuild_idf();
        Ok(hv)
    }
}

impl Encoder for HashingVectorizer {
    fn dim(&self) -> usize {
        self.dim
    }
    fn encode(&self, desc: &Description) -> SparseVector {
        self.transform(desc)
    }
}

/// Hashes `desc` into `dim` buckets with unit idf.
pub fn hash_transform(desc: &Description, config: NgramConfig, dim: usize) -> Result<SparseVector> {
    Ok(HashingVectorizer::new(config, dim)?.transform(desc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a_64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a_64(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn deterministic_and_empty() {
        let d = Description::from_text("a", "Tropicana 100% Apple Juice 1L");
        let a = hash_transform(&d, NgramConfig::ranker(), 1 << 12).unwrap();
        let b = hash_transform(&d, NgramConfig::ranker(), 1 << 12).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-9);
        let empty = Description::from_text("e", "");
        assert!(hash_transform(&empty, NgramConfig::ranker(), 8).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(HashingVectorizer::new(NgramConfig::ranker(), 1).is_err());
        assert!(HashingVectorizer::new(NgramConfig::ranker(), 100).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let docs: Vec<Description> = ["abc", "abd"]
            .iter()
            .map(|t| Description::from_text("x", t))
            .collect();
        let hv = HashingVectorizer::fit(&docs, NgramConfig::chars(2, 2), 64).unwrap();
        let back = HashingVectorizer::from_json(&hv.to_json()).unwrap();
        assert_eq!(back.transform(&docs[0]), hv.transform(&docs[0]));
    }
}
