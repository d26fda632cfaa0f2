//! A scripted agent that stands in for a human reviewer.

use std::collections::BTreeMap;

use linematch::corpus::TripleRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::event::{ExampleKind, FeedbackEvent, FeedbackKind};
use crate::service::Service;

/// One query and the pool entry the agent considers correct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTask {
    pub query: String,
    pub target_id: String,
}

/// Pool entries and tasks from generated triples: the pool holds every
/// distinct `s_j` and `s_i`, and each task asks for its `s_j`.
pub fn tasks_from_triples(triples: &[TripleRecord]) -> (Vec<(String, String)>, Vec<AgentTask>) {
    let mut ids: BTreeMap<String, String> = BTreeMap::new();
    let mut pool = Vec::new();
    let mut id_of = |text: &str| -> String {
        ids.entry(text.to_string())
            .or_insert_with(|| {
                let id = format!("po-{}", pool.len());
                pool.push((id.clone(), text.to_string()));
                id
            })
            .clone()
    };
    let tasks = triples
        .iter()
        .map(|t| {
            let target_id = id_of(&t.s_j);
            id_of(&t.s_i);
            AgentTask {
                query: t.s.clone(),
                target_id,
            }
        })
        .collect();
    (pool, tasks)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub events: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub triples: usize,
    pub pairs: usize,
    /// Queries whose top candidate was already the target.
    pub top1_hits: usize,
    pub queries: usize,
}

/// Accepts the best candidate when it is the target, otherwise rejects it
/// and prefers the target. Adds a label event with probability `p_label`.
#[derive(Debug, Clone)]
pub struct SimulatedAgent {
    pub agent_id: String,
    pub p_label: f64,
    rng: ChaCha8Rng,
    next_event: u64,
}

impl SimulatedAgent {
    pub fn new(agent_id: impl Into<String>, p_label: f64, seed: u64) -> Self {
        SimulatedAgent {
            agent_id: agent_id.into(),
            p_label,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_event: 0,
        }
    }

    fn event(&mut self, query_id: &str, candidate: &str, kind: FeedbackKind, alt: Option<&str>) -> FeedbackEvent {
        self.next_event += 1;
        FeedbackEvent {
            event_id: format!("{}-{}", self.agent_id, self.next_event),
            timestamp: self.next_event,
            query_id: query_id.to_string(),
            candidate_id: candidate.to_string(),
            kind,
            alternate_id: alt.map(str::to_string),
            agent_id: self.agent_id.clone(),
        }
    }

    /// The events for one served query.
    pub fn decide(&mut self, query_id: &str, best_id: &str, target_id: &str) -> Vec<FeedbackEvent> {
        let label = self.rng.gen_bool(self.p_label);
        if best_id == target_id {
            let mut out = vec![self.event(query_id, best_id, FeedbackKind::Accept, None)];
            if label {
                out.push(self.event(query_id, best_id, FeedbackKind::LabelSimilar, None));
            }
            out
        } else {
            let mut out = vec![
                self.event(query_id, best_id, FeedbackKind::Reject, None),
                self.event(query_id, best_id, FeedbackKind::PreferAlternate, Some(target_id)),
            ];
            if label {
                out.push(self.event(query_id, best_id, FeedbackKind::LabelDissimilar, None));
                out.push(self.event(query_id, target_id, FeedbackKind::LabelSimilar, None));
            }
            out
        }
    }

    /// Cycles through `tasks` until exactly `n_events` events were submitted.
    pub fn run(&mut self, service: &Service, tasks: &[AgentTask], n_events: usize) -> Result<SimulationReport> {
        let mut report = SimulationReport::default();
        if tasks.is_empty() {
            return Ok(report);
        }
        'outer: for task in tasks.iter().cycle() {
            if report.events >= n_events {
                break;
            }
            let served = service.serve_next(&task.query)?;
            report.queries += 1;
            if served.best.id == task.target_id {
                report.top1_hits += 1;
            }
            for event in self.decide(&served.query_id, &served.best.id, &task.target_id) {
                if report.events >= n_events {
                    break 'outer;
                }
                let kind = serde_json::to_value(event.kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                let out = service.submit_feedback(event)?;
                report.events += 1;
                *report.by_kind.entry(kind).or_default() += 1;
                match out.example_kind {
                    ExampleKind::Triple => report.triples += 1,
                    ExampleKind::Pair => report.pairs += 1,
                    ExampleKind::None => {}
                }
            }
        }
        Ok(report)
    }
}
