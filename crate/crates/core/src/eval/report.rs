use serde::{Deserialize, Serialize};

use super::{EncodingCell, LearningCurve};

/// Learning-curve results with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub v: u32,
    pub config: serde_json::Value,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingReport {
    pub v: u32,
    pub config: serde_json::Value,
    pub cells: Vec<EncodingCell>,
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn curve_text(curve: &LearningCurve) -> String {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| vec![p.samples.to_string(), format!("{:.4}", p.mean), format!("{:.4}", p.std)])
        .collect();
    format!(
        "permutations: {}  seed: {}  cosine: {:.4}\n{}",
        curve.n_permutations,
        curve.seed,
        curve.cosine_precision,
        table(&["samples", "mean", "std"], &rows)
    )
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn curve_csv(curve: &LearningCurve) -> String {
    to_csv(
        &["samples", "mean", "std", "cosine"],
        curve
            .points
            .iter()
            .map(|p| {
                vec![
                    p.samples.to_string(),
                    p.mean.to_string(),
                    p.std.to_string(),
                    curve.cosine_precision.to_string(),
                ]
            })
            .collect(),
    )
}

pub fn encoding_text(cells: &[EncodingCell]) -> String {
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.dataset.clone(),
                c.encoder.clone(),
                c.runs.to_string(),
                format!("{:.4}", c.mean),
                format!("{:.4}", c.std),
                format!("{:.4}", c.cosine_mean),
            ]
        })
        .collect();
    table(&["dataset", "encoder", "runs", "mean", "std", "cosine"], &rows)
}

pub fn encoding_csv(cells: &[EncodingCell]) -> String {
    to_csv(
        &["dataset", "encoder", "runs", "mean", "std", "cosine"],
        cells
            .iter()
            .map(|c| {
                vec![
                    c.dataset.clone(),
                    c.encoder.clone(),
                    c.runs.to_string(),
                    c.mean.to_string(),
                    c.std.to_string(),
                    c.cosine_mean.to_string(),
                ]
            })
            .collect(),
    )
}
