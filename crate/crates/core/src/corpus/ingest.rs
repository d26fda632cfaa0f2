use std::collections::HashMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::textprep::{Description, Normalizer, RawDescription, Source};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
    Tsv,
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(Format::Jsonl),
            "csv" => Some(Format::Csv),
            "tsv" | "tab" => Some(Format::Tsv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    Similar,
    Dissimilar,
}

impl PairLabel {
    fn parse(s: &str) -> Option<PairLabel> {
        match s.trim().to_ascii_lowercase().as_str() {
            "similar" | "1" | "match" | "true" => Some(PairLabel::Similar),
            "dissimilar" | "0" | "no_match" | "false" => Some(PairLabel::Dissimilar),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPair {
    pub partner: String,
    pub label: PairLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_pair: Option<LabelPair>,
}

/// Header names for delimited input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub id: String,
    pub text: String,
    pub partner: String,
    pub label: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: "id".into(),
            text: "text".into(),
            partner: "partner".into(),
            label: "label".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    /// 1-based line (JSONL) or record number (CSV/TSV, header excluded).
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub kept: String,
    pub dropped: String,
    pub normalized_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: usize,
    pub errors: Vec<LineError>,
    pub duplicates: Vec<DedupReport>,
}

/// Deduplicated records with their normalized descriptions, index-aligned.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub descriptions: Vec<Description>,
    pub normalizer: Normalizer,
    pub report: IngestReport,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Normalizes `records` with a lexicon built from their own text and
    /// drops later records whose normalized text repeats an earlier one.
    pub fn from_records(records: Vec<Record>, mut report: IngestReport) -> Self {
        let normalizer = Normalizer::from_corpus(records.iter().map(|r| r.text.as_str()));
        let mut seen: HashMap<String, String> = HashMap::new();
        let mut kept = Vec::new();
        let mut descriptions = Vec::new();
        for (i, rec) in records.into_iter().enumerate() {
            let raw = RawDescription::new(rec.id.clone(), rec.text.clone(), Source::Invoice);
            let desc = match normalizer.normalize(&raw) {
                Ok(d) => d,
                Err(e) => {
                    report.errors.push(LineError {
                        line: i + 1,
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            if let Some(first) = seen.get(&desc.normalized_text) {
                report.duplicates.push(DedupReport {
                    kept: first.clone(),
                    dropped: rec.id.clone(),
                    normalized_text: desc.normalized_text.clone(),
                });
                continue;
            }
            seen.insert(desc.normalized_text.clone(), rec.id.clone());
            kept.push(rec);
            descriptions.push(desc);
        }
        Corpus {
            records: kept,
            descriptions,
            normalizer,
            report,
        }
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }
}

/// Parses one JSONL record. Ids and texts must be non-empty.
pub fn parse_jsonl_line(line: &str) -> Result<Record> {
    let rec: Record = serde_json::from_str(line).map_err(|e| Error::Malformed(e.to_string()))?;
    check(rec)
}

fn check(rec: Record) -> Result<Record> {
    if rec.id.trim().is_empty() {
        return Err(Error::Malformed("empty id".into()));
    }
    if rec.text.trim().is_empty() {
        return Err(Error::Malformed(format!("record {} has empty text", rec.id)));
    }
    Ok(rec)
}

fn read_jsonl(text: &str, report: &mut IngestReport) -> Vec<Record> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        report.records_read += 1;
        match parse_jsonl_line(line) {
            Ok(r) => out.push(r),
            Err(e) => report.errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    out
}

fn read_delimited(text: &str, delimiter: u8, columns: &ColumnMap, report: &mut IngestReport) -> Result<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed(format!("header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, text_col) = match (col(&columns.id), col(&columns.text)) {
        (Some(i), Some(t)) => (i, t),
        _ => {
            return Err(Error::Malformed(format!(
                "header must contain {:?} and {:?}",
                columns.id, columns.text
            )))
        }
    };
    let partner_col = col(&columns.partner);
    let label_col = col(&columns.label);
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        report.records_read += 1;
        let parsed = row
            .map_err(|e| Error::Malformed(e.to_string()))
            .and_then(|row| {
                let field = |c: usize| row.get(c).unwrap_or("").to_string();
                let label_pair = match (partner_col.map(field), label_col.map(field)) {
                    (Some(p), Some(l)) if !p.is_empty() || !l.is_empty() => Some(LabelPair {
                        partner: p,
                        label: PairLabel::parse(&l)
                            .ok_or_else(|| Error::Malformed(format!("unknown label {l:?}")))?,
                    }),
                    _ => None,
                };
                check(Record {
                    id: field(id_col),
                    text: field(text_col),
                    label_pair,
                })
            });
        match parsed {
            Ok(r) => out.push(r),
            Err(e) => report.errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Reads and normalizes a corpus. Malformed records are collected in the
/// report; if nothing survives, the whole ingestion fails.
pub fn ingest_reader<R: Read>(mut reader: R, format: Format, columns: &ColumnMap, origin: &Path) -> Result<Corpus> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io(origin, e))?;
    let mut report = IngestReport::default();
    let records = match format {
        Format::Jsonl => read_jsonl(&text, &mut report),
        Format::Csv => read_delimited(&text, b',', columns, &mut report)?,
        Format::Tsv => read_delimited(&text, b'\t', columns, &mut report)?,
    };
    let corpus = Corpus::from_records(records, report);
    if corpus.is_empty() {
        return Err(Error::NothingIngested {
            path: PathBuf::from(origin),
            errors: corpus.report.errors.len(),
        });
    }
    Ok(corpus)
}

pub fn ingest(path: impl AsRef<Path>, format: Format) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, format, &ColumnMap::default(), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl(text: &str) -> Result<Corpus> {
        ingest_reader(text.as_bytes(), Format::Jsonl, &ColumnMap::default(), Path::new("mem"))
    }

    #[test]
    fn jsonl_with_errors_and_duplicates() {
        let text = r#"{"id": "a", "text": "TRES 739mL CD KER Smooth"}
not json
{"id": "b", "text": "tres 739ml cd ker smooth"}

{"id": "c", "text": "Edible oil 5 lt", "label_pair": {"partner": "Coconut oil", "label": "dissimilar"}}
{"id": "", "text": "x"}
"#;
        let c = jsonl(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.report.records_read, 5);
        assert_eq!(c.report.errors.iter().map(|e| e.line).collect::<Vec<_>>(), [2, 6]);
        assert_eq!(c.report.duplicates.len(), 1);
        assert_eq!(c.report.duplicates[0].dropped, "b");
        assert_eq!(c.records[1].label_pair.as_ref().unwrap().label, PairLabel::Dissimilar);
        assert_eq!(c.descriptions[1].quantities.len(), 1);
    }

    #[test]
    fn empty_or_all_bad_fails() {
        assert!(matches!(jsonl(""), Err(Error::NothingIngested { errors: 0, .. })));
        assert!(matches!(jsonl("x\ny\n"), Err(Error::NothingIngested { errors: 2, .. })));
    }

    #[test]
    fn csv_and_tsv() {
        let csv = "id,text,partner,label\n1,\"Dove, men\",,\n2,soap,body soap,similar\n3,,,\n";
        let c = ingest_reader(csv.as_bytes(), Format::Csv, &ColumnMap::default(), Path::new("m")).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.records[0].text, "Dove, men");
        assert!(c.records[0].label_pair.is_none());
        assert_eq!(c.records[1].label_pair.as_ref().unwrap().partner, "body soap");
        assert_eq!(c.report.errors.len(), 1);

        let tsv = "sku\tdesc\nA\tblue pen\n";
        let cols = ColumnMap {
            id: "sku".into(),
            text: "desc".into(),
            ..Default::default()
        };
        let t = ingest_reader(tsv.as_bytes(), Format::Tsv, &cols, Path::new("m")).unwrap();
        assert_eq!(t.records[0].id, "A");
        let bad = ingest_reader(tsv.as_bytes(), Format::Tsv, &ColumnMap::default(), Path::new("m"));
        assert!(matches!(bad, Err(Error::Malformed(_))));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::from_path(Path::new("x.JSONL")), Some(Format::Jsonl));
        assert_eq!(Format::from_path(Path::new("x.tsv")), Some(Format::Tsv));
        assert_eq!(Format::from_path(Path::new("x")), None);
    }
}
