//! Run configuration: a TOML or JSON file, then command-line overrides.
//! The final value is echoed into every report.

use std::path::{Path, PathBuf};

use linematch::corpus::{InvoiceParams, ProductParams};
use linematch::eval::{EncoderSpec, DEFAULT_PERMUTATIONS};
use linematch::fuzzy::DEFAULT_K;
use linematch::ranker::DEFAULT_C;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_HASH_DIM: usize = 1 << 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub antonyms: Option<PathBuf>,
}

/// Rule parameters for triple generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaParams {
    /// Chance of light edits on the second string after a numeric change.
    pub p_second_edit: f64,
    /// Chance of each optional rule in the product recipe.
    pub p_optional: f64,
    pub second_edits: (usize, usize),
    pub third_edits: (usize, usize),
}

impl Default for DeltaParams {
    fn default() -> Self {
        let inv = InvoiceParams::default();
        DeltaParams {
            p_second_edit: inv.p_second_edit,
            p_optional: ProductParams::default().p_antonym,
            second_edits: inv.second_edits,
            third_edits: inv.third_edits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub seed: u64,
    pub c: f64,
    pub k: usize,
    pub encoder: EncoderSpec,
    pub delta: DeltaParams,
    /// Sample counts to evaluate at; evenly spaced when absent.
    pub checkpoints: Option<Vec<usize>>,
    pub permutations: usize,
    /// Lexically normalize triples before encoding.
    pub normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            seed: 0,
            c: DEFAULT_C,
            k: DEFAULT_K,
            encoder: EncoderSpec::Exact,
            delta: DeltaParams::default(),
            checkpoints: None,
            permutations: DEFAULT_PERMUTATIONS,
            normalize: true,
        }
    }
}

fn check_range(name: &str, (lo, hi): (usize, usize)) -> Result<()> {
    if lo > hi {
        return Err(CliError::Usage(format!("{name}: lower bound {lo} above upper bound {hi}")));
    }
    Ok(())
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Usage(format!("{name} must be in [0, 1], got {p}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let err = |message: String| CliError::Config {
            path: path.to_path_buf(),
            message,
        };
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| err(e.to_string())),
            Some("toml") => toml::from_str(&text).map_err(|e| err(e.to_string())),
            _ => Err(err("expected a .toml or .json file".into())),
        }
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(CliError::Usage(format!("C must be positive, got {}", self.c)));
        }
        if self.k == 0 {
            return Err(CliError::Usage("K must be at least 1".into()));
        }
        if self.permutations == 0 {
            return Err(CliError::Usage("need at least one permutation".into()));
        }
        if let EncoderSpec::Hashed { dim: 0 } = self.encoder {
            return Err(CliError::Usage("hashed dimension must be positive".into()));
        }
        check_probability("p_second_edit", self.delta.p_second_edit)?;
        check_probability("p_optional", self.delta.p_optional)?;
        check_range("second_edits", self.delta.second_edits)?;
        check_range("third_edits", self.delta.third_edits)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configs serialize")
    }

    pub fn invoice_params(&self) -> Result<InvoiceParams> {
        let mut p = InvoiceParams {
            p_second_edit: self.delta.p_second_edit,
            second_edits: self.delta.second_edits,
            third_edits: self.delta.third_edits,
            ..Default::default()
        };
        if let Some(path) = &self.paths.antonyms {
            p.antonyms.load(path)?;
        }
        Ok(p)
    }

    pub fn product_params(&self) -> Result<ProductParams> {
        let q = self.delta.p_optional;
        let mut p = ProductParams {
            p_small_delta: q,
            p_second_edit: self.delta.p_second_edit,
            p_antonym: q,
            p_product: q,
            p_third_edit: q,
            second_edits: self.delta.second_edits,
            third_edits: self.delta.third_edits,
            ..Default::default()
        };
        if let Some(path) = &self.paths.antonyms {
            p.antonyms.load(path)?;
        }
        Ok(p)
    }
}

/// Parses `exact`, `hashed` or `hashed:<dim>`.
pub fn parse_encoder(s: &str) -> std::result::Result<EncoderSpec, String> {
    match s.split_once(':') {
        None if s == "exact" => Ok(EncoderSpec::Exact),
        None if s == "hashed" => Ok(EncoderSpec::Hashed { dim: DEFAULT_HASH_DIM }),
        Some(("hashed", d)) => d
            .parse()
            .map(|dim| EncoderSpec::Hashed { dim })
            .map_err(|e| format!("bad dimension `{d}`: {e}")),
        _ => Err(format!("unknown encoder `{s}` (exact, hashed, hashed:<dim>)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("run.toml");
        std::fs::write(&toml_path, "seed = 7\nc = 0.5\n[encoder]\nkind = \"hashed\"\ndim = 64\n[delta]\nthird_edits = [2, 3]\n").unwrap();
        let cfg = RunConfig::load(&toml_path).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.encoder, EncoderSpec::Hashed { dim: 64 });
        assert_eq!(cfg.delta.third_edits, (2, 3));
        assert_eq!(cfg.permutations, 20);

        let json_path = dir.path().join("run.json");
        std::fs::write(&json_path, serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&json_path).unwrap(), cfg);

        std::fs::write(&toml_path, "sede = 7\n").unwrap();
        assert!(matches!(RunConfig::load(&toml_path), Err(CliError::Config { .. })));
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig {
            c: 0.0,
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 1);
        let mut bad = RunConfig::default();
        bad.delta.second_edits = (3, 1);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn encoders() {
        assert_eq!(parse_encoder("exact").unwrap(), EncoderSpec::Exact);
        assert_eq!(parse_encoder("hashed:32768").unwrap(), EncoderSpec::Hashed { dim: 32768 });
        assert!(parse_encoder("bag").is_err());
    }
}
