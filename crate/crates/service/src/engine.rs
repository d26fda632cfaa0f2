//! The candidate pool, the online models, and the fold that applies log
//! records to them.

use std::collections::{BTreeMap, HashMap};

use linematch::classifier::{ClassifierSnapshot, PairClassifier, PairExample};
use linematch::codec;
use linematch::fuzzy::{CandidatePool, PoolEntry};
use linematch::online::Step;
use linematch::ranker::{BackendKind, RankConfig, RankModel, RankSnapshot, Triple};
use linematch::textprep::{Description, Normalizer};
use linematch::vectorizer::{fnv1a_64, NgramConfig, SparseVector, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::event::{ExampleKind, LogRecord, LoggedExample};

const SNAPSHOT_MAGIC: &[u8; 4] = b"LMSV";
pub const SNAPSHOT_VERSION: u32 = 1;

/// A purchase-order pool with the normalizer and ranker encoder fit on it.
#[derive(Debug)]
pub struct PoolState {
    version: String,
    normalizer: Normalizer,
    pool: CandidatePool,
    encoder: Vocabulary,
    by_id: HashMap<String, usize>,
}

impl PoolState {
    /// `items` are `(id, text)` pairs; ids must be unique.
    pub fn build(items: Vec<(String, String)>) -> Result<Self> {
        Self::build_with(items, NgramConfig::ranker())
    }

    /// Like [`PoolState::build`] with a chosen ranker feature set.
    pub fn build_with(items: Vec<(String, String)>, features: NgramConfig) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(items.len());
        let mut hash_input = String::new();
        for (i, (id, text)) in items.iter().enumerate() {
            if by_id.insert(id.clone(), i).is_some() {
                return Err(linematch::Error::InvalidParameter(format!("duplicate pool id `{id}`")).into());
            }
            hash_input.push_str(id);
            hash_input.push('\u{1f}');
            hash_input.push_str(text);
            hash_input.push('\u{1e}');
        }
        hash_input.push_str(&serde_json::to_string(&features).expect("configs serialize"));
        let normalizer = Normalizer::from_corpus(items.iter().map(|(_, t)| t.as_str()));
        let descriptions = items
            .iter()
            .map(|(id, text)| normalizer.normalize_text(id, text))
            .collect::<linematch::Result<Vec<_>>>()?;
        let encoder = Vocabulary::fit(&descriptions, features)?;
        let pool = CandidatePool::build(descriptions)?;
        Ok(PoolState {
            version: format!("{:016x}", fnv1a_64(hash_input.as_bytes())),
            normalizer,
            pool,
            encoder,
            by_id,
        })
    }

    /// Content fingerprint of the pool, stable across restarts.
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn pool(&self) -> &CandidatePool {
        &self.pool
    }

    pub fn entry(&self, id: &str) -> Option<&PoolEntry> {
        self.by_id.get(id).map(|&i| self.pool.entry(i))
    }

    /// Ranker feature dimension.
    pub fn dim(&self) -> usize {
        self.encoder.dim()
    }

    pub fn describe(&self, id: &str, text: &str) -> Result<Description> {
        Ok(self.normalizer.normalize_text(id, text)?)
    }

    pub fn encode(&self, text: &str) -> Result<SparseVector> {
        Ok(self.encoder.transform(&self.describe("", text)?))
    }
}

/// Precision over feedback, each example scored before the model learns
/// from it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningPrecision {
    pub n: u64,
    pub correct: u64,
    /// Running precision after each example.
    pub history: Vec<f64>,
}

impl RunningPrecision {
    pub fn record(&mut self, correct: bool) {
        self.n += 1;
        if correct {
            self.correct += 1;
        }
        self.history.push(self.correct as f64 / self.n as f64);
    }

    pub fn precision(&self) -> Option<f64> {
        self.history.last().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Triples where the ranker already preferred the alternate.
    pub ranker: RunningPrecision,
    /// Labeled pairs the classifier already got right.
    pub classifier: RunningPrecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeenEvent {
    pub event_id: String,
    pub seq: u64,
    pub kind: ExampleKind,
}

/// What applying one record did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Applied {
    pub kind: ExampleKind,
    pub step: Option<Step>,
}

/// Ranker, classifier and bookkeeping; a pure fold over the log.
#[derive(Debug, Clone)]
pub struct Models {
    version: u64,
    last_seq: u64,
    ranker: RankModel,
    classifier: PairClassifier,
    seen: BTreeMap<String, (u64, ExampleKind)>,
    metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSnapshot {
    pub v: u32,
    pub pool_version: String,
    pub version: u64,
    pub last_seq: u64,
    pub ranker: RankSnapshot,
    pub classifier: ClassifierSnapshot,
    pub seen: Vec<SeenEvent>,
    pub metrics: Metrics,
}

impl Models {
    /// Untrained models over the pool's feature space. The ranker uses the
    /// implicit backend so that publishing a copy per event stays cheap.
    pub fn fresh(pool: &PoolState, c: f64) -> Result<Self> {
        Ok(Models {
            version: 0,
            last_seq: 0,
            ranker: RankModel::with_backend(pool.dim(), RankConfig::with_c(c), BackendKind::Implicit)?,
            classifier: PairClassifier::new(pool.dim(), c)?,
            seen: BTreeMap::new(),
            metrics: Metrics::default(),
        })
    }

    /// Number of events that produced a training example.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn ranker(&self) -> &RankModel {
        &self.ranker
    }

    pub fn classifier(&self) -> &PairClassifier {
        &self.classifier
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn seen(&self, event_id: &str) -> Option<(u64, ExampleKind)> {
        self.seen.get(event_id).copied()
    }

    pub fn apply(&mut self, record: &LogRecord, pool: &PoolState) -> Result<Applied> {
        let fail = |message: String| ServiceError::Replay {
            seq: record.seq,
            message,
        };
        if record.seq <= self.last_seq {
            return Err(fail(format!("already at sequence {}", self.last_seq)));
        }
        if self.seen.contains_key(&record.event.event_id) {
            return Err(fail(format!("duplicate event id `{}`", record.event.event_id)));
        }
        if record.pool_version != pool.version() {
            return Err(ServiceError::PoolMismatch {
                expected: pool.version().to_string(),
                found: record.pool_version.clone(),
            });
        }
        let step = match &record.example {
            None => None,
            Some(LoggedExample::Triple { s, s_j, s_i }) => {
                let triple = Triple::new(pool.encode(s)?, pool.encode(s_j)?, pool.encode(s_i)?);
                let (pos, neg) = self.ranker.triple_scores(&triple)?;
                let step = self.ranker.update(&triple)?;
                self.metrics.ranker.record(pos > neg);
                Some(step)
            }
            Some(LoggedExample::Pair { u, v, label }) => {
                let example = PairExample {
                    u: pool.encode(u)?,
                    v: pool.encode(v)?,
                    label: *label,
                };
                let (_, predicted) = self.classifier.classify(&example.u, &example.v)?;
                let step = self.classifier.update(&example)?;
                self.metrics.classifier.record(predicted == *label);
                Some(step)
            }
        };
        let kind = record.example_kind();
        if step.is_some() {
            self.version += 1;
        }
        self.last_seq = record.seq;
        self.seen.insert(record.event.event_id.clone(), (record.seq, kind));
        Ok(Applied { kind, step })
    }

    pub fn to_snapshot(&self, pool: &PoolState) -> ServiceSnapshot {
        ServiceSnapshot {
            v: SNAPSHOT_VERSION,
            pool_version: pool.version().to_string(),
            version: self.version,
            last_seq: self.last_seq,
            ranker: self.ranker.to_snapshot(),
            classifier: self.classifier.to_snapshot(),
            seen: self
                .seen
                .iter()
                .map(|(id, &(seq, kind))| SeenEvent {
                    event_id: id.clone(),
                    seq,
                    kind,
                })
                .collect(),
            metrics: self.metrics.clone(),
        }
    }

    pub fn to_bytes(&self, pool: &PoolState) -> Vec<u8> {
        codec::encode(SNAPSHOT_MAGIC, &self.to_snapshot(pool))
    }

    pub fn from_snapshot(snap: ServiceSnapshot, pool: &PoolState) -> Result<Self> {
        if snap.v != SNAPSHOT_VERSION {
            return Err(ServiceError::SchemaVersion(snap.v));
        }
        if snap.pool_version != pool.version() {
            return Err(ServiceError::PoolMismatch {
                expected: pool.version().to_string(),
                found: snap.pool_version,
            });
        }
        let ranker = RankModel::from_snapshot(snap.ranker)?;
        let classifier = PairClassifier::from_snapshot(snap.classifier)?;
        if ranker.dim() != pool.dim() || classifier.dim() != pool.dim() {
            return Err(linematch::Error::Snapshot(format!(
                "model dimension {} does not match pool dimension {}",
                ranker.dim(),
                pool.dim()
            ))
            .into());
        }
        let mut seen = BTreeMap::new();
        for s in snap.seen {
            if s.seq > snap.last_seq || seen.insert(s.event_id, (s.seq, s.kind)).is_some() {
                return Err(linematch::Error::Snapshot("inconsistent event index".into()).into());
            }
        }
        Ok(Models {
            version: snap.version,
            last_seq: snap.last_seq,
            ranker,
            classifier,
            seen,
            metrics: snap.metrics,
        })
    }

    pub fn from_bytes(bytes: &[u8], pool: &PoolState) -> Result<Self> {
        Self::from_snapshot(decode_snapshot(bytes)?, pool)
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<ServiceSnapshot> {
    Ok(codec::decode(SNAPSHOT_MAGIC, bytes)?)
}

/// Folds `records` into `base` (fresh models when absent), skipping those
/// the base already covers.
pub fn replay(pool: &PoolState, records: &[LogRecord], base: Option<Models>, c: f64) -> Result<Models> {
    let mut models = match base {
        Some(m) => m,
        None => Models::fresh(pool, c)?,
    };
    let start = models.last_seq;
    for record in records.iter().filter(|r| r.seq > start) {
        models.apply(record, pool)?;
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{FeedbackEvent, FeedbackKind, LOG_VERSION};
    use linematch::classifier::Label;

    pub(crate) fn pool() -> PoolState {
        PoolState::build(
            [
                ("po-1", "TRES 0.739L CD KER Smth"),
                ("po-2", "Tres Soya Smooth Conditioner 150 gm"),
                ("po-3", "Tropicana 100% Apple Juice - 1L"),
            ]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        )
        .unwrap()
    }

    fn record(pool: &PoolState, seq: u64, example: Option<LoggedExample>) -> LogRecord {
        LogRecord {
            v: LOG_VERSION,
            seq,
            pool_version: pool.version().to_string(),
            event: FeedbackEvent {
                event_id: format!("e{seq}"),
                timestamp: 0,
                query_id: "q".into(),
                candidate_id: "po-1".into(),
                kind: FeedbackKind::PreferAlternate,
                alternate_id: None,
                agent_id: String::new(),
            },
            query_text: "Tres Smooth Conditioner".into(),
            example,
        }
    }

    fn triple() -> LoggedExample {
        LoggedExample::Triple {
            s: "Tres Smooth Conditioner".into(),
            s_j: "Tres Soya Smooth Conditioner 150 gm".into(),
            s_i: "TRES 0.739L CD KER Smth".into(),
        }
    }

    #[test]
    fn pool_version_is_content_hash() {
        assert_eq!(pool().version(), pool().version());
        let other = PoolState::build(vec![("a".into(), "apple juice".into())]).unwrap();
        assert_ne!(other.version(), pool().version());
        assert!(PoolState::build(vec![("a".into(), "x".into()), ("a".into(), "y".into())]).is_err());
        assert!(PoolState::build(Vec::new()).is_err());
    }

    #[test]
    fn records_fold_into_models() {
        let pool = pool();
        let mut m = Models::fresh(&pool, 0.1).unwrap();
        let a = m.apply(&record(&pool, 1, None), &pool).unwrap();
        assert_eq!(a.kind, ExampleKind::None);
        assert_eq!(m.version(), 0);
        let a = m.apply(&record(&pool, 2, Some(triple())), &pool).unwrap();
        assert!(a.step.unwrap().is_active());
        assert_eq!(m.version(), 1);
        assert_eq!(m.metrics().ranker.n, 1);
        assert!(m.apply(&record(&pool, 2, None), &pool).is_err());
        let pair = LoggedExample::Pair {
            u: "Tres Smooth".into(),
            v: "Tres Soya Smooth Conditioner 150 gm".into(),
            label: Label::Match,
        };
        m.apply(&record(&pool, 3, Some(pair)), &pool).unwrap();
        assert_eq!(m.version(), 2);
        assert_eq!(m.metrics().classifier.history, vec![0.0]);
        assert_eq!(m.seen("e3"), Some((3, ExampleKind::Pair)));
    }

    #[test]
    fn snapshot_roundtrip() {
        let pool = pool();
        let log = vec![record(&pool, 1, Some(triple())), record(&pool, 4, None)];
        let m = replay(&pool, &log, None, 0.1).unwrap();
        let bytes = m.to_bytes(&pool);
        let back = Models::from_bytes(&bytes, &pool).unwrap();
        assert_eq!(back.to_bytes(&pool), bytes);
        assert_eq!(back.last_seq(), 4);
        assert!(Models::from_bytes(&bytes[1..], &pool).is_err());
        let other = PoolState::build(vec![("a".into(), "apple juice".into())]).unwrap();
        assert!(matches!(Models::from_bytes(&bytes, &other), Err(ServiceError::PoolMismatch { .. })));
    }

    #[test]
    fn empty_log_gives_fresh_models() {
        let pool = pool();
        let m = replay(&pool, &[], None, 0.1).unwrap();
        assert_eq!(m.to_bytes(&pool), Models::fresh(&pool, 0.1).unwrap().to_bytes(&pool));
    }
}
