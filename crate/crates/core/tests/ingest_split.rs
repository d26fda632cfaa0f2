use std::io::Write;

use linematch::corpus::{ingest, split_indices, Format};
use linematch::Error;

fn write(lines: &[String]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
    f
}

fn record(i: usize) -> String {
    serde_json::json!({"id": format!("inv-{i}"), "text": format!("item {i} pack of {} units", i * 7 + 1)}).to_string()
}

#[test]
fn invoice_scale_file_splits_two_to_one() {
    let lines: Vec<String> = (0..370).map(record).collect();
    let f = write(&lines);
    let corpus = ingest(f.path(), Format::Jsonl).unwrap();
    assert_eq!(corpus.len(), 370);
    assert!(corpus.report.errors.is_empty());
    let split = split_indices(corpus.len(), 42);
    assert_eq!(split.train.len(), 247);
    assert_eq!(split.test.len(), 123);
    assert!(split.train.iter().all(|i| !split.test.contains(i)));
}

#[test]
fn one_duplicate_is_reported() {
    let mut lines: Vec<String> = (0..5).map(record).collect();
    lines.push(serde_json::json!({"id": "dup", "text": "ITEM 2 pack of 15 units"}).to_string());
    let corpus = ingest(write(&lines).path(), Format::Jsonl).unwrap();
    assert_eq!(corpus.len(), 5);
    assert_eq!(corpus.report.duplicates.len(), 1);
    assert_eq!(corpus.report.duplicates[0].kept, "inv-2");
}

#[test]
fn empty_and_missing_files_fail() {
    let empty = write(&[]);
    assert!(matches!(ingest(empty.path(), Format::Jsonl), Err(Error::NothingIngested { .. })));
    assert!(matches!(ingest("/nonexistent/corpus.jsonl", Format::Jsonl), Err(Error::Io { .. })));
}
