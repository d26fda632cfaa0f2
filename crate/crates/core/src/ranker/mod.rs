//! Online bilinear similarity `f(a, b) = a^T W b` learned from preference
//! triples with passive-aggressive updates.
//!
//! For a triple `(s, s_j, s_i)` where `s_j` is preferred, the loss is
//! `max(0, 1 - f(s, s_j) + f(s, s_i))` and an active step adds
//! `tau * s (s_j - s_i)^T` to `W` with `tau = min(C, loss / (|s|^2 |s_j - s_i|^2))`.
//! `W` starts at the identity, so an untrained model ranks by dot product.

mod dense;
mod implicit;

use serde::{Deserialize, Serialize};

use dense::DenseW;
use implicit::ImplicitW;
pub use implicit::RankOneTerm;

use crate::codec;
use crate::online::{pa_step, Step};
use crate::vectorizer::SparseVector;
use crate::{Error, Result};

pub const DEFAULT_C: f64 = 0.1;
pub const DEFAULT_DENSE_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    /// Aggressiveness: upper bound on every step size.
    pub c: f64,
    /// Accepted for configuration compatibility; the PA step does not use it.
    pub eta: f64,
    /// Largest dimension stored as a dense matrix.
    pub dense_max_dim: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            c: DEFAULT_C,
            eta: 0.0,
            dense_max_dim: DEFAULT_DENSE_MAX_DIM,
        }
    }
}

impl RankConfig {
    pub fn with_c(c: f64) -> Self {
        RankConfig {
            c,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AgentFeedback,
    #[default]
    Synthetic,
}

/// `query` with a preferred and a less preferred candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub query: SparseVector,
    pub preferred: SparseVector,
    pub less_preferred: SparseVector,
    #[serde(default)]
    pub provenance: Provenance,
}

impl Triple {
    pub fn new(query: SparseVector, preferred: SparseVector, less_preferred: SparseVector) -> Self {
        Triple {
            query,
            preferred,
            less_preferred,
            provenance: Provenance::Synthetic,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        for v in [&self.query, &self.preferred, &self.less_preferred] {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Dense,
    Implicit,
}

#[derive(Debug, Clone)]
enum Backend {
    Dense(DenseW),
    Implicit(ImplicitW),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    /// Position in the stream, starting at 1.
    pub t: usize,
    pub loss: f64,
    pub tau: f64,
    pub step: Step,
}

#[derive(Debug, Clone)]
pub struct RankModel {
    dim: usize,
    config: RankConfig,
    updates: u64,
    backend: Backend,
}

const SNAPSHOT_VERSION: u32 = 1;
const SNAPSHOT_MAGIC: &[u8; 4] = b"LMRK";
const MAX_DENSE_DIM: usize = 1 << 14;

/// Serialized form of a [`RankModel`]. Exactly one of `dense` (row-major
/// `W`) and `terms` is non-empty, as dictated by `backend`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSnapshot {
    pub v: u32,
    pub backend: BackendKind,
    pub dim: usize,
    pub config: RankConfig,
    pub updates: u64,
    pub dense: Vec<f64>,
    pub terms: Vec<RankOneTerm>,
}

fn check_config(config: &RankConfig) -> Result<()> {
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {}", config.c)));
    }
    if !config.eta.is_finite() {
        return Err(Error::InvalidParameter("eta must be finite".into()));
    }
    Ok(())
}

impl RankModel {
    /// Identity-initialized model; dense when `dim <= config.dense_max_dim`.
    pub fn new(dim: usize, config: RankConfig) -> Result<Self> {
        let kind = if dim <= config.dense_max_dim.min(MAX_DENSE_DIM) {
            BackendKind::Dense
        } else {
            BackendKind::Implicit
        };
        Self::with_backend(dim, config, kind)
    }

    pub fn with_backend(dim: usize, config: RankConfig, kind: BackendKind) -> Result<Self> {
        check_config(&config)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let backend = match kind {
            BackendKind::Dense => {
                if dim > MAX_DENSE_DIM {
                    return Err(Error::InvalidParameter(format!(
                        "dense backend supports at most {MAX_DENSE_DIM} dimensions"
                    )));
                }
                Backend::Dense(DenseW::identity(dim))
            }
            BackendKind::Implicit => Backend::Implicit(ImplicitW::identity(dim)),
        };
        Ok(RankModel {
            dim,
            config,
            updates: 0,
            backend,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &RankConfig {
        &self.config
    }

    pub fn c(&self) -> f64 {
        self.config.c
    }

    /// Number of active updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Dense(_) => BackendKind::Dense,
            Backend::Implicit(_) => BackendKind::Implicit,
        }
    }

    fn check(&self, v: &SparseVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.dim(),
            });
        }
        Ok(())
    }

    pub fn score(&self, a: &SparseVector, b: &SparseVector) -> Result<f64> {
        Ok(self.scores(a, &[b])?[0])
    }

    /// `a^T W b` for each `b` in `bs`.
    pub fn scores(&self, a: &SparseVector, bs: &[&SparseVector]) -> Result<Vec<f64>> {
        self.check(a)?;
        for b in bs {
            self.check(b)?;
        }
        Ok(match &self.backend {
            Backend::Dense(w) => bs.iter().map(|b| w.score(a, b)).collect(),
            Backend::Implicit(w) => w.scores(a, bs),
        })
    }

    /// `(f(s, s_j), f(s, s_i))`.
    pub fn triple_scores(&self, triple: &Triple) -> Result<(f64, f64)> {
        let s = self.scores(&triple.query, &[&triple.preferred, &triple.less_preferred])?;
        Ok((s[0], s[1]))
    }

    /// `f(s, s_j) - f(s, s_i)`.
    pub fn margin(&self, triple: &Triple) -> Result<f64> {
        let (pos, neg) = self.triple_scores(triple)?;
        Ok(pos - neg)
    }

    pub fn hinge_loss(&self, triple: &Triple) -> Result<f64> {
        Ok((1.0 - self.margin(triple)?).max(0.0))
    }

    /// One passive-aggressive step. Passive and degenerate steps leave the
    /// model bit-for-bit unchanged.
    pub fn update(&mut self, triple: &Triple) -> Result<Step> {
        triple.check_dim(self.dim)?;
        let loss = self.hinge_loss(triple)?;
        if loss.is_nan() || loss <= 0.0 {
            return Ok(Step::Passive);
        }
        let diff = triple.preferred.sub(&triple.less_preferred);
        let step = pa_step(loss, triple.query.norm_sq() * diff.norm_sq(), self.config.c);
        if let Step::Active { tau, .. } = step {
            match &mut self.backend {
                Backend::Dense(w) => w.add_outer(tau, &triple.query, &diff),
                Backend::Implicit(w) => w.push(RankOneTerm {
                    tau,
                    query: triple.query.clone(),
                    diff,
                }),
            }
            self.updates += 1;
        }
        Ok(step)
    }

    /// Folds [`update`](Self::update) over `triples` in order.
    pub fn train_stream<'a, I>(&mut self, triples: I) -> Result<Vec<StepTrace>>
    where
        I: IntoIterator<Item = &'a Triple>,
    {
        let mut trace = Vec::new();
        for (k, triple) in triples.into_iter().enumerate() {
            let step = self.update(triple)?;
            trace.push(StepTrace {
                t: k + 1,
                loss: step.loss(),
                tau: step.tau(),
                step,
            });
        }
        Ok(trace)
    }

    /// Materializes `W` row-major. Intended for small dimensions.
    pub fn to_dense_matrix(&self) -> Vec<f64> {
        match &self.backend {
            Backend::Dense(w) => w.data.clone(),
            Backend::Implicit(w) => {
                let mut m = DenseW::identity(self.dim);
                for term in &w.terms {
                    m.add_outer(term.tau, &term.query, &term.diff);
                }
                m.data
            }
        }
    }

    pub fn to_snapshot(&self) -> RankSnapshot {
        let (dense, terms) = match &self.backend {
            Backend::Dense(w) => (w.data.clone(), Vec::new()),
            Backend::Implicit(w) => (Vec::new(), w.terms.clone()),
        };
        RankSnapshot {
            v: SNAPSHOT_VERSION,
            backend: self.backend_kind(),
            dim: self.dim,
            config: self.config,
            updates: self.updates,
            dense,
            terms,
        }
    }

    pub fn from_snapshot(snap: RankSnapshot) -> Result<Self> {
        if snap.v != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported ranker version {}", snap.v)));
        }
        let mut model = Self::with_backend(snap.dim, snap.config, snap.backend)
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        model.updates = snap.updates;
        match &mut model.backend {
            Backend::Dense(w) => {
                if snap.dense.len() != snap.dim * snap.dim || !snap.terms.is_empty() {
                    return Err(Error::Snapshot("dense matrix has the wrong shape".into()));
                }
                if snap.dense.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Snapshot("non-finite matrix entry".into()));
                }
                w.data = snap.dense;
            }
            Backend::Implicit(w) => {
                if !snap.dense.is_empty() || snap.terms.len() as u64 != snap.updates {
                    return Err(Error::Snapshot("rank-1 list does not match update count".into()));
                }
                for term in snap.terms {
                    if term.query.dim() != snap.dim || term.diff.dim() != snap.dim {
                        return Err(Error::Snapshot("rank-1 term dimension mismatch".into()));
                    }
                    if !(term.tau > 0.0 && term.tau <= snap.config.c) {
                        return Err(Error::Snapshot("step size outside (0, C]".into()));
                    }
                    w.push(term);
                }
            }
        }
        Ok(model)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(SNAPSHOT_MAGIC, &self.to_snapshot())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_snapshot(codec::decode(SNAPSHOT_MAGIC, bytes)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("ranker serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }
}
