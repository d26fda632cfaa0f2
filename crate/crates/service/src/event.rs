//! Feedback events and their append-only JSONL log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use linematch::classifier::Label;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Accept,
    Reject,
    PreferAlternate,
    LabelSimilar,
    LabelDissimilar,
}

/// What an agent said about a served candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackEvent {
    /// Client-minted idempotency key.
    pub event_id: String,
    /// Client clock, milliseconds since the epoch.
    #[serde(default)]
    pub timestamp: u64,
    pub query_id: String,
    pub candidate_id: String,
    pub kind: FeedbackKind,
    #[serde(default)]
    pub alternate_id: Option<String>,
    #[serde(default)]
    pub agent_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    None,
    Triple,
    Pair,
}

/// The training example an event produced, as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoggedExample {
    Triple { s: String, s_j: String, s_i: String },
    Pair { u: String, v: String, label: Label },
}

impl LoggedExample {
    pub fn kind(&self) -> ExampleKind {
        match self {
            LoggedExample::Triple { .. } => ExampleKind::Triple,
            LoggedExample::Pair { .. } => ExampleKind::Pair,
        }
    }
}

/// One line of the log. Replay needs nothing beyond these records and the
/// pool they were served from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub v: u32,
    /// Server-assigned position, strictly increasing from 1.
    pub seq: u64,
    pub pool_version: String,
    pub event: FeedbackEvent,
    pub query_text: String,
    pub example: Option<LoggedExample>,
}

impl LogRecord {
    pub fn example_kind(&self) -> ExampleKind {
        self.example.as_ref().map_or(ExampleKind::None, LoggedExample::kind)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("log records serialize")
    }
}

/// Parses log text, checking versions and sequence order. Blank lines are
/// skipped; anything else that does not parse halts with its line number.
pub fn parse_log(text: &str) -> Result<Vec<LogRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record(line, i + 1, out.last())?);
    }
    Ok(out)
}

fn parse_record(line: &str, line_no: usize, prev: Option<&LogRecord>) -> Result<LogRecord> {
    let corrupt = |message: String| ServiceError::CorruptLog {
        line: line_no,
        message,
    };
    let record: LogRecord = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
    if record.v != LOG_VERSION {
        return Err(corrupt(format!("unsupported record version {}", record.v)));
    }
    let last = prev.map_or(0, |p| p.seq);
    if record.seq <= last {
        return Err(corrupt(format!("sequence {} after {last}", record.seq)));
    }
    Ok(record)
}

/// Reads a log file; a missing file is an empty log.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LogRecord>> {
    let path = path.as_ref();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(ServiceError::io(path, e)),
    };
    let mut out: Vec<LogRecord> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ServiceError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line, i + 1, out.last())?;
        out.push(record);
    }
    Ok(out)
}

/// Where records go. The in-memory sink keeps the text for tests and
/// for embedding without a data directory.
#[derive(Debug)]
pub enum EventLog {
    Memory(String),
    File { path: PathBuf, file: File },
}

impl EventLog {
    pub fn memory() -> Self {
        EventLog::Memory(String::new())
    }

    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ServiceError::io(&path, e))?;
        Ok(EventLog::File { path, file })
    }

    /// Appends one record and syncs it to disk before returning.
    pub fn append(&mut self, record: &LogRecord) -> Result<()> {
        let mut line = record.to_json_line();
        line.push('\n');
        match self {
            EventLog::Memory(text) => text.push_str(&line),
            EventLog::File { path, file } => {
                file.write_all(line.as_bytes())
                    .and_then(|_| file.sync_data())
                    .map_err(|e| ServiceError::io(path.as_path(), e))?;
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        if let EventLog::File { path, file } = self {
            file.sync_all().map_err(|e| ServiceError::io(path.as_path(), e))?;
        }
        Ok(())
    }

    /// The buffered text of an in-memory log.
    pub fn text(&self) -> Option<&str> {
        match self {
            EventLog::Memory(text) => Some(text),
            EventLog::File { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seq: u64) -> LogRecord {
        LogRecord {
            v: LOG_VERSION,
            seq,
            pool_version: "00".into(),
            event: FeedbackEvent {
                event_id: format!("e{seq}"),
                timestamp: 0,
                query_id: "q".into(),
                candidate_id: "a".into(),
                kind: FeedbackKind::PreferAlternate,
                alternate_id: Some("b".into()),
                agent_id: "x".into(),
            },
            query_text: "soap".into(),
            example: Some(LoggedExample::Triple {
                s: "soap".into(),
                s_j: "b".into(),
                s_i: "a".into(),
            }),
        }
    }

    #[test]
    fn roundtrip_and_order() {
        let mut log = EventLog::memory();
        log.append(&record(1)).unwrap();
        log.append(&record(2)).unwrap();
        let text = log.text().unwrap().to_string();
        assert_eq!(parse_log(&text).unwrap(), vec![record(1), record(2)]);
        assert!(parse_log("").unwrap().is_empty());

        let swapped = format!("{}\n{}\n", record(2).to_json_line(), record(1).to_json_line());
        assert!(matches!(parse_log(&swapped), Err(ServiceError::CorruptLog { line: 2, .. })));
    }

    #[test]
    fn corrupt_line_reports_position() {
        let text = format!("{}\n\n{{\"v\": 1, \"seq\"\n", record(1).to_json_line());
        match parse_log(&text) {
            Err(ServiceError::CorruptLog { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_log_appends() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        assert!(read_log(&path).unwrap().is_empty());
        let mut log = EventLog::open(&path).unwrap();
        log.append(&record(1)).unwrap();
        drop(log);
        let mut log = EventLog::open(&path).unwrap();
        log.append(&record(2)).unwrap();
        assert_eq!(read_log(&path).unwrap().len(), 2);
    }

    #[test]
    fn event_wire_format() {
        let e: FeedbackEvent = serde_json::from_str(
            r#"{"event_id": "u1", "query_id": "q", "candidate_id": "c", "kind": "prefer_alternate", "alternate_id": "d"}"#,
        )
        .unwrap();
        assert_eq!(e.kind, FeedbackKind::PreferAlternate);
        assert_eq!(e.timestamp, 0);
        assert!(serde_json::from_str::<FeedbackEvent>(r#"{"event_id": "u1"}"#).is_err());
    }
}
