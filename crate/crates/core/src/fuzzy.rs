//! Top-K candidate retrieval from a purchase-order pool.
//!
//! Scores are cosines over character bi- and trigram tf-idf vectors,
//! accumulated through an inverted index. The noun-phrase gate runs before
//! ranking: gate failures score 0.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::textprep::{noun_phrase_gate, Description};
use crate::vectorizer::{NgramConfig, SparseVector, Vocabulary};
use crate::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub description: Description,
    pub vector: SparseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub id: String,
    /// Position in the pool.
    pub index: usize,
    /// Cosine in [0, 1]; 0 whenever the gate failed.
    pub fuzzy_score: f64,
    pub gate_passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternateStrategy {
    #[default]
    SecondBest,
    UniformRandom,
}

#[derive(Debug, Clone)]
pub struct CandidatePool {
    vocab: Vocabulary,
    entries: Vec<PoolEntry>,
    postings: Vec<Vec<(u32, f64)>>,
}

/// Builds a pool over `pos` with its own char 2–3 vocabulary.
pub fn build_pool(pos: Vec<Description>) -> Result<CandidatePool> {
    CandidatePool::build(pos)
}

impl CandidatePool {
    pub fn build(pos: Vec<Description>) -> Result<Self> {
        if pos.is_empty() {
            return Err(Error::EmptyInput("candidate pool needs at least one description"));
        }
        let vocab = Vocabulary::fit(&pos, NgramConfig::fuzzy())?;
        let mut postings = vec![Vec::new(); vocab.dim()];
        let entries: Vec<PoolEntry> = pos
            .into_iter()
            .enumerate()
            .map(|(e, description)| {
                let vector = vocab.transform(&description);
                for (i, w) in vector.iter() {
                    postings[i as usize].push((e as u32, w));
                }
                PoolEntry { description, vector }
            })
            .collect();
        Ok(CandidatePool {
            vocab,
            entries,
            postings,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &PoolEntry {
        &self.entries[index]
    }

    pub fn find(&self, id: &str) -> Option<&PoolEntry> {
        self.entries.iter().find(|e| e.description.id == id)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Raw cosines of `query` against every entry.
    fn raw_scores(&self, query: &Description) -> Vec<f64> {
        let q = self.vocab.transform(query);
        let mut scores = vec![0.0; self.entries.len()];
        for (i, w) in q.iter() {
            for &(e, ew) in &self.postings[i as usize] {
                scores[e as usize] += w * ew;
            }
        }
        scores
    }

    /// Every entry, gated and sorted by score descending then id ascending.
    pub fn rank_all(&self, query: &Description) -> Vec<RankedCandidate> {
        let scores = self.raw_scores(query);
        let mut ranked: Vec<RankedCandidate> = self
            .entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                let gate_passed = noun_phrase_gate(query, &e.description);
                let fuzzy_score = if gate_passed {
                    scores[index].clamp(0.0, 1.0)
                } else {
                    0.0
                };
                RankedCandidate {
                    id: e.description.id.clone(),
                    index,
                    fuzzy_score,
                    gate_passed,
                }
            })
            .collect();
        ranked.sort_by(candidate_order);
        ranked
    }

    /// At most `k` best candidates.
    pub fn top_k(&self, query: &Description, k: usize) -> Result<Vec<RankedCandidate>> {
        if k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let mut ranked = self.rank_all(query);
        ranked.truncate(k);
        Ok(ranked)
    }

    /// The next candidate to show after the ones in `exclude` were rejected.
    pub fn next_alternate(
        &self,
        query: &Description,
        exclude: &HashSet<String>,
        strategy: AlternateStrategy,
        seed: u64,
    ) -> Result<&PoolEntry> {
        match strategy {
            AlternateStrategy::SecondBest => self
                .rank_all(query)
                .into_iter()
                .find(|c| !exclude.contains(&c.id))
                .map(|c| &self.entries[c.index])
                .ok_or(Error::PoolExhausted),
            AlternateStrategy::UniformRandom => {
                let mut remaining: Vec<&PoolEntry> = self
                    .entries
                    .iter()
                    .filter(|e| !exclude.contains(&e.description.id))
                    .collect();
                remaining.sort_by(|a, b| a.description.id.cmp(&b.description.id));
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                remaining.choose(&mut rng).copied().ok_or(Error::PoolExhausted)
            }
        }
    }
}

fn candidate_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.fuzzy_score
        .partial_cmp(&a.fuzzy_score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.id.cmp(&b.id))
        .then_with(|| a.index.cmp(&b.index))
}
