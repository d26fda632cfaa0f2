//! Serving, feedback ingestion and persistence around one pool.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use linematch::classifier::Label;
use linematch::fuzzy::{RankedCandidate, DEFAULT_K};
use linematch::online::Step;
use linematch::ranker::DEFAULT_C;
use linematch::vectorizer::fnv1a_64;
use serde::{Deserialize, Serialize};

use crate::engine::{Models, PoolState, RunningPrecision};
use crate::error::{Result, ServiceError};
use crate::event::{read_log, EventLog, ExampleKind, FeedbackEvent, FeedbackKind, LogRecord, LoggedExample, LOG_VERSION};

pub const API_VERSION: u32 = 1;
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 50;
pub const DEFAULT_MAX_PENDING: usize = 100_000;

const LOG_FILE: &str = "events.jsonl";
const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    /// Candidates per response: the best one plus `k - 1` alternates.
    pub k: usize,
    pub c: f64,
    /// Keep a snapshot every this many model versions.
    pub snapshot_every: u64,
    /// Train the classifier on accepted pairs as matches.
    pub accept_as_positive: bool,
    /// Log and snapshots live here; in memory when absent.
    pub data_dir: Option<PathBuf>,
    pub max_pending: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            k: DEFAULT_K,
            c: DEFAULT_C,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            accept_as_positive: false,
            data_dir: None,
            max_pending: DEFAULT_MAX_PENDING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub id: String,
    pub text: String,
    pub fuzzy_score: f64,
    pub gate_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServeResponse {
    pub v: u32,
    pub query_id: String,
    pub query_text: String,
    pub pool_version: String,
    pub snapshot_version: u64,
    pub best: CandidateView,
    pub alternates: Vec<CandidateView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackOutcome {
    pub v: u32,
    pub seq: u64,
    pub example_kind: ExampleKind,
    pub snapshot_version: u64,
    /// The event id was already ingested; nothing changed.
    pub duplicate: bool,
    pub step: Option<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolVersion {
    pub v: u32,
    pub pool_version: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionView {
    pub n: u64,
    pub correct: u64,
    pub precision: Option<f64>,
    pub history: Vec<f64>,
}

impl From<&RunningPrecision> for PrecisionView {
    fn from(r: &RunningPrecision) -> Self {
        PrecisionView {
            n: r.n,
            correct: r.correct,
            precision: r.precision(),
            history: r.history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsView {
    pub v: u32,
    pub snapshot_version: u64,
    pub events: u64,
    pub ranker: PrecisionView,
    pub classifier: PrecisionView,
}

#[derive(Debug, Default)]
struct Pending {
    texts: HashMap<String, String>,
    order: VecDeque<String>,
}

struct Writer {
    models: Arc<Models>,
    log: EventLog,
}

/// Many readers serve from the latest published models; one writer at a
/// time appends to the log and publishes the result.
pub struct Service {
    config: ServiceConfig,
    pool: Arc<PoolState>,
    published: RwLock<Arc<Models>>,
    writer: Mutex<Writer>,
    pending: Mutex<Pending>,
    snapshots: Mutex<BTreeMap<u64, Arc<Vec<u8>>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn snapshot_name(version: u64) -> String {
    format!("{version:012}.snap")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| ServiceError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| ServiceError::io(path, e))
}

impl Service {
    /// Starts over `pool`. With a data directory, the newest snapshot is
    /// loaded and the log tail replayed on top of it.
    pub fn open(pool: PoolState, config: ServiceConfig) -> Result<Self> {
        if config.k == 0 {
            return Err(linematch::Error::InvalidParameter("K must be at least 1".into()).into());
        }
        let mut snapshots = BTreeMap::new();
        let (models, log) = match &config.data_dir {
            None => (Models::fresh(&pool, config.c)?, EventLog::memory()),
            Some(dir) => {
                let snap_dir = dir.join(SNAPSHOT_DIR);
                fs::create_dir_all(&snap_dir).map_err(|e| ServiceError::io(&snap_dir, e))?;
                let mut names: Vec<PathBuf> = fs::read_dir(&snap_dir)
                    .map_err(|e| ServiceError::io(&snap_dir, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "snap"))
                    .collect();
                names.sort();
                let mut base = None;
                for path in &names {
                    let bytes = fs::read(path).map_err(|e| ServiceError::io(path, e))?;
                    let models = Models::from_bytes(&bytes, &pool)?;
                    snapshots.insert(models.version(), Arc::new(bytes));
                    base = Some(models);
                }
                let log_path = dir.join(LOG_FILE);
                let records = read_log(&log_path)?;
                let models = crate::engine::replay(&pool, &records, base, config.c)?;
                (models, EventLog::open(log_path)?)
            }
        };
        let models = Arc::new(models);
        Ok(Service {
            config,
            pool: Arc::new(pool),
            published: RwLock::new(models.clone()),
            writer: Mutex::new(Writer { models, log }),
            pending: Mutex::new(Pending::default()),
            snapshots: Mutex::new(snapshots),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn pool(&self) -> &PoolState {
        &self.pool
    }

    /// The latest published models.
    pub fn models(&self) -> Arc<Models> {
        self.published.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn pool_version(&self) -> PoolVersion {
        PoolVersion {
            v: API_VERSION,
            pool_version: self.pool.version().to_string(),
            size: self.pool.len(),
        }
    }

    pub fn query_id(&self, text: &str) -> String {
        let key = format!("{}\u{1f}{text}", self.pool.version());
        format!("{:016x}", fnv1a_64(key.as_bytes()))
    }

    fn view(&self, c: &RankedCandidate) -> CandidateView {
        CandidateView {
            id: c.id.clone(),
            text: self.pool.pool().entry(c.index).description.original_text.clone(),
            fuzzy_score: c.fuzzy_score,
            gate_passed: c.gate_passed,
        }
    }

    /// Normalize, gate, rank and present the best candidate with its
    /// alternates. When every candidate fails the gate, the top one is
    /// still returned with score 0.
    pub fn serve_next(&self, text: &str) -> Result<ServeResponse> {
        let query = self.pool.describe("query", text)?;
        let ranked = self.pool.pool().top_k(&query, self.config.k)?;
        let snapshot_version = self.models().version();
        let query_id = self.query_id(text);
        self.remember(&query_id, text);
        let mut views = ranked.iter().map(|c| self.view(c));
        let best = views.next().expect("pools are never empty");
        Ok(ServeResponse {
            v: API_VERSION,
            query_id,
            query_text: text.to_string(),
            pool_version: self.pool.version().to_string(),
            snapshot_version,
            best,
            alternates: views.collect(),
        })
    }

    fn remember(&self, query_id: &str, text: &str) {
        let mut p = lock(&self.pending);
        if p.texts.insert(query_id.to_string(), text.to_string()).is_none() {
            p.order.push_back(query_id.to_string());
        }
        while p.order.len() > self.config.max_pending {
            if let Some(old) = p.order.pop_front() {
                p.texts.remove(&old);
            }
        }
    }

    fn candidate_text(&self, id: &str) -> Result<String> {
        self.pool
            .entry(id)
            .map(|e| e.description.original_text.clone())
            .ok_or_else(|| ServiceError::UnknownCandidate(id.to_string()))
    }

    fn form_example(&self, event: &FeedbackEvent, query: &str) -> Result<Option<LoggedExample>> {
        let candidate = self.candidate_text(&event.candidate_id)?;
        let pair = |label| {
            Some(LoggedExample::Pair {
                u: query.to_string(),
                v: candidate.clone(),
                label,
            })
        };
        Ok(match event.kind {
            FeedbackKind::Accept if self.config.accept_as_positive => pair(Label::Match),
            FeedbackKind::Accept | FeedbackKind::Reject => None,
            FeedbackKind::LabelSimilar => pair(Label::Match),
            FeedbackKind::LabelDissimilar => pair(Label::NoMatch),
            FeedbackKind::PreferAlternate => {
                let alt = event
                    .alternate_id
                    .as_deref()
                    .ok_or_else(|| ServiceError::InvalidEvent("prefer_alternate needs an alternate id".into()))?;
                if alt == event.candidate_id {
                    return Err(ServiceError::InvalidEvent("alternate equals the rejected candidate".into()));
                }
                Some(LoggedExample::Triple {
                    s: query.to_string(),
                    s_j: self.candidate_text(alt)?,
                    s_i: candidate.clone(),
                })
            }
        })
    }

    /// Logs the event, updates the models it trains and publishes them.
    /// The record is on disk before this returns. Repeated event ids are
    /// answered from the first ingestion without touching anything.
    pub fn submit_feedback(&self, event: FeedbackEvent) -> Result<FeedbackOutcome> {
        if event.event_id.is_empty() {
            return Err(ServiceError::InvalidEvent("empty event id".into()));
        }
        let mut w = lock(&self.writer);
        if let Some((seq, kind)) = w.models.seen(&event.event_id) {
            return Ok(FeedbackOutcome {
                v: API_VERSION,
                seq,
                example_kind: kind,
                snapshot_version: w.models.version(),
                duplicate: true,
                step: None,
            });
        }
        let query_text = lock(&self.pending)
            .texts
            .get(&event.query_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownQuery(event.query_id.clone()))?;
        let example = self.form_example(&event, &query_text)?;
        let record = LogRecord {
            v: LOG_VERSION,
            seq: w.models.last_seq() + 1,
            pool_version: self.pool.version().to_string(),
            event,
            query_text,
            example,
        };
        let mut next = Models::clone(&w.models);
        let applied = next.apply(&record, &self.pool)?;
        w.log.append(&record)?;
        let next = Arc::new(next);
        w.models = next.clone();
        *self.published.write().unwrap_or_else(|e| e.into_inner()) = next.clone();
        if applied.step.is_some() && next.version().is_multiple_of(self.config.snapshot_every.max(1)) {
            self.store_snapshot(&next)?;
        }
        Ok(FeedbackOutcome {
            v: API_VERSION,
            seq: record.seq,
            example_kind: applied.kind,
            snapshot_version: next.version(),
            duplicate: false,
            step: applied.step,
        })
    }

    fn store_snapshot(&self, models: &Models) -> Result<Arc<Vec<u8>>> {
        let bytes = Arc::new(models.to_bytes(&self.pool));
        if let Some(dir) = &self.config.data_dir {
            write_atomic(&dir.join(SNAPSHOT_DIR).join(snapshot_name(models.version())), &bytes)?;
        }
        lock(&self.snapshots).insert(models.version(), bytes.clone());
        Ok(bytes)
    }

    /// Serialized models at `version`: a kept snapshot, or the live models
    /// when `version` is current.
    pub fn snapshot_bytes(&self, version: u64) -> Result<Arc<Vec<u8>>> {
        if let Some(bytes) = lock(&self.snapshots).get(&version) {
            return Ok(bytes.clone());
        }
        let models = self.models();
        if models.version() == version {
            return Ok(Arc::new(models.to_bytes(&self.pool)));
        }
        Err(ServiceError::SnapshotNotFound(version))
    }

    /// Versions with a kept snapshot.
    pub fn snapshot_versions(&self) -> Vec<u64> {
        lock(&self.snapshots).keys().copied().collect()
    }

    pub fn metrics(&self) -> MetricsView {
        let m = self.models();
        MetricsView {
            v: API_VERSION,
            snapshot_version: m.version(),
            events: m.last_seq(),
            ranker: (&m.metrics().ranker).into(),
            classifier: (&m.metrics().classifier).into(),
        }
    }

    /// Text of an in-memory log.
    pub fn log_text(&self) -> Option<String> {
        lock(&self.writer).log.text().map(str::to_string)
    }

    /// Syncs the log and writes a snapshot of the current models.
    pub fn shutdown(&self) -> Result<()> {
        let mut w = lock(&self.writer);
        w.log.flush()?;
        let models = w.models.clone();
        drop(w);
        if models.last_seq() > 0 {
            self.store_snapshot(&models)?;
        }
        Ok(())
    }
}
