//! Live feedback loop: serve candidate matches, ingest agent feedback,
//! train the online models and persist everything as an event log.

pub mod agent;
pub mod engine;
mod error;
pub mod event;
pub mod http;
pub mod service;

pub use agent::{tasks_from_triples, AgentTask, SimulatedAgent, SimulationReport};
pub use engine::{replay, Metrics, Models, PoolState, RunningPrecision, ServiceSnapshot};
pub use error::{Result, ServiceError};
pub use event::{parse_log, read_log, EventLog, ExampleKind, FeedbackEvent, FeedbackKind, LogRecord, LoggedExample};
pub use service::{FeedbackOutcome, MetricsView, ServeResponse, Service, ServiceConfig};
