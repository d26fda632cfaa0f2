use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use linematch::corpus::{
    self, derive_second_third, derive_sentence_triples, fuzzy_order_check, generate_products, item_seed,
    product_triples, read_triples, split_indices, write_triples, DedupReport, Format, LineError, OrderReport,
    PairLabel, ProductLexicons, ProductVocabulary, SentenceParams, Skip, TripleRecord,
};
use linematch::eval::{
    compare_encodings, curve_csv, curve_text, encode_dataset, encoding_csv, encoding_text, learning_curve,
    CurveOptions, CurveReport, DatasetOptions, EncodingReport, NamedTriples,
};
use linematch::ranker::{RankConfig, RankModel};
use linematch::taxonomy::{Catalog, Taxonomy, TaxonomyMatcher};
use linematch::vectorizer::NgramConfig;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::{CompareArgs, FormatArg, GenTriplesArgs, IngestArgs, Recipe, TaxmatchArgs, TrainEvalArgs};

pub const REPORT_VERSION: u32 = 1;

pub fn resolve_format(path: &Path, arg: Option<FormatArg>) -> Result<Format> {
    arg.map(Format::from)
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| CliError::Usage(format!("cannot tell the format of {}; pass --format", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_words(path: &Path) -> Result<Vec<String>> {
    Ok(read_file(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// The explicit report path, else `<output>.report.json`.
fn report_path(explicit: Option<&Path>, output: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        output.map(|o| {
            let mut name = o.as_os_str().to_owned();
            name.push(".report.json");
            PathBuf::from(name)
        })
    })
}

fn emit<T: Serialize>(report: &T, path: Option<&Path>, json: bool, text: &str) -> Result<()> {
    let rendered = serde_json::to_string_pretty(report).expect("reports serialize");
    if let Some(p) = path {
        write_file(p, &(rendered.clone() + "\n"))?;
    }
    if json {
        println!("{rendered}");
    } else {
        print!("{text}");
    }
    Ok(())
}

fn required(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.clone().ok_or_else(|| CliError::Usage(format!("no {what} given")))
}

#[derive(Debug, Serialize)]
struct IngestSummary {
    v: u32,
    config: serde_json::Value,
    input: PathBuf,
    format: Format,
    records_read: usize,
    kept: usize,
    errors: Vec<LineError>,
    duplicates: Vec<DedupReport>,
    train: usize,
    test: usize,
}

pub fn ingest(mut cfg: RunConfig, a: IngestArgs) -> Result<()> {
    cfg.paths.input = a.input.or(cfg.paths.input);
    cfg.paths.output = a.output.or(cfg.paths.output);
    cfg.paths.report = a.report.or(cfg.paths.report);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    let input = required(&cfg.paths.input, "input file")?;
    let format = resolve_format(&input, a.format)?;
    let corpus = corpus::ingest(&input, format)?;
    let split = split_indices(corpus.len(), cfg.seed);
    if let Some(out) = &cfg.paths.output {
        let lines: String = corpus
            .records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect();
        write_file(out, &lines)?;
    }
    for e in corpus.report.errors.iter().take(10) {
        eprintln!("warning: {}:{}: {}", input.display(), e.line, e.message);
    }
    let text = format!(
        "read {} records from {}: {} kept, {} duplicates, {} malformed\nsplit (seed {}): {} train / {} test\n",
        corpus.report.records_read,
        input.display(),
        corpus.len(),
        corpus.report.duplicates.len(),
        corpus.report.errors.len(),
        cfg.seed,
        split.train.len(),
        split.test.len()
    );
    let report = IngestSummary {
        v: REPORT_VERSION,
        config: cfg.to_json(),
        input,
        format,
        records_read: corpus.report.records_read,
        kept: corpus.len(),
        errors: corpus.report.errors.clone(),
        duplicates: corpus.report.duplicates.clone(),
        train: split.train.len(),
        test: split.test.len(),
    };
    let path = report_path(cfg.paths.report.as_deref(), cfg.paths.output.as_deref());
    emit(&report, path.as_deref(), a.json, &text)
}

#[derive(Debug, Serialize)]
struct GenSummary {
    v: u32,
    config: serde_json::Value,
    recipe: String,
    inputs: usize,
    triples: usize,
    skipped: Vec<Skip>,
    /// Applications per `target:rule`.
    rules: BTreeMap<String, usize>,
    fuzzy_order: Option<OrderReport>,
}

fn rule_counts(triples: &[TripleRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for t in triples {
        for r in &t.rules {
            let target = serde_json::to_value(r.target)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            *out.entry(format!("{target}:{}", r.rule.id())).or_default() += 1;
        }
    }
    out
}

pub fn gen_triples(mut cfg: RunConfig, a: GenTriplesArgs) -> Result<()> {
    cfg.paths.input = a.input.or(cfg.paths.input);
    cfg.paths.output = a.output.or(cfg.paths.output);
    cfg.paths.report = a.report.or(cfg.paths.report);
    cfg.paths.antonyms = a.antonyms.or(cfg.paths.antonyms);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.validate()?;
    let seed = cfg.seed;

    let vocab = ProductVocabulary::default();
    let (texts, pairs) = match (a.synthetic, &cfg.paths.input) {
        (Some(n), _) => (generate_products(n, &vocab, seed)?, Vec::new()),
        (None, Some(input)) => {
            let corpus = corpus::ingest(input, resolve_format(input, a.format)?)?;
            let by_id: BTreeMap<&str, &str> = corpus.records.iter().map(|r| (r.id.as_str(), r.text.as_str())).collect();
            let pairs: Vec<(String, String, PairLabel)> = corpus
                .records
                .iter()
                .filter_map(|r| {
                    let lp = r.label_pair.as_ref()?;
                    Some((r.text.clone(), by_id.get(lp.partner.as_str())?.to_string(), lp.label))
                })
                .collect();
            (corpus.records.iter().map(|r| r.text.clone()).collect(), pairs)
        }
        (None, None) => return Err(CliError::Usage("give --input or --synthetic".into())),
    };

    let products = a.products.as_deref().map(read_words).transpose()?;
    let mut skipped = Vec::new();
    let triples = match a.recipe {
        Recipe::Invoice => {
            let mut params = cfg.invoice_params()?;
            params.products = products.unwrap_or_default();
            texts
                .iter()
                .enumerate()
                .filter_map(|(i, s)| match derive_second_third(s, &params, item_seed(seed, i)) {
                    Ok(t) => Some(t),
                    Err(skip) => {
                        skipped.push(skip);
                        None
                    }
                })
                .collect()
        }
        Recipe::Product => {
            let defaults = vocab.lexicons()?;
            let brands = match &a.brands {
                Some(p) => read_words(p)?,
                None => defaults.brands().to_vec(),
            };
            let lex = ProductLexicons::new(brands, products.unwrap_or_else(|| defaults.products().to_vec()))?;
            product_triples(&texts, &lex, &cfg.product_params()?, seed)
        }
        Recipe::Sentence => {
            if pairs.is_empty() {
                return Err(CliError::Usage("the sentence recipe needs records with label pairs".into()));
            }
            derive_sentence_triples(&pairs, &SentenceParams::default(), seed)
        }
    };
    let fuzzy_order = if triples.is_empty() {
        None
    } else {
        Some(fuzzy_order_check(&triples)?)
    };
    let body = write_triples(&triples);
    match &cfg.paths.output {
        Some(out) => write_file(out, &body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    let recipe = format!("{:?}", a.recipe).to_lowercase();
    let text = format!(
        "{} triples from {} inputs ({recipe} recipe, seed {seed}), {} skipped{}\n",
        triples.len(),
        texts.len(),
        skipped.len(),
        fuzzy_order
            .as_ref()
            .map(|o| format!("; fuzzy order holds for {:.4}", o.fraction()))
            .unwrap_or_default()
    );
    let report = GenSummary {
        v: REPORT_VERSION,
        config: cfg.to_json(),
        recipe,
        inputs: texts.len(),
        triples: triples.len(),
        skipped,
        rules: rule_counts(&triples),
        fuzzy_order,
    };
    let path = report_path(cfg.paths.report.as_deref(), cfg.paths.output.as_deref());
    if cfg.paths.output.is_none() {
        // Triples went to stdout; keep the summary off it.
        eprint!("{text}");
        return emit(&report, path.as_deref(), false, "");
    }
    emit(&report, path.as_deref(), a.json, &text)
}

fn load_triples(path: &Path) -> Result<Vec<TripleRecord>> {
    Ok(read_triples(&read_file(path)?)?)
}

pub fn train_eval(mut cfg: RunConfig, a: TrainEvalArgs) -> Result<()> {
    cfg.paths.input = a.triples.or(cfg.paths.input);
    cfg.paths.report = a.report.or(cfg.paths.report);
    cfg.seed = a.model.seed.unwrap_or(cfg.seed);
    cfg.c = a.model.c.unwrap_or(cfg.c);
    cfg.encoder = a.model.encoder.unwrap_or(cfg.encoder);
    cfg.normalize = cfg.normalize && !a.model.no_normalize;
    cfg.permutations = a.permutations.unwrap_or(cfg.permutations);
    cfg.checkpoints = a.checkpoints.or(cfg.checkpoints);
    cfg.validate()?;
    let input = required(&cfg.paths.input, "triples file")?;
    let records = load_triples(&input)?;
    let data = encode_dataset(
        &records,
        &DatasetOptions {
            split_seed: cfg.seed,
            encoder: cfg.encoder,
            ngrams: NgramConfig::ranker(),
            normalize: cfg.normalize,
        },
    )?;
    let rank = RankConfig::with_c(cfg.c);
    let curve = learning_curve(
        || RankModel::new(data.dim, rank),
        &data.train,
        &data.test,
        &CurveOptions {
            n_permutations: cfg.permutations,
            checkpoints: cfg.checkpoints.clone(),
            seed: cfg.seed,
        },
    )?;
    if let Some(p) = &a.csv {
        write_file(p, &curve_csv(&curve))?;
    }
    let text = format!(
        "{} triples ({} train / {} test), dim {}, encoder {}\n{}",
        records.len(),
        data.train.len(),
        data.test.len(),
        data.dim,
        cfg.encoder.name(),
        curve_text(&curve)
    );
    let report = CurveReport {
        v: REPORT_VERSION,
        config: cfg.to_json(),
        n_train: data.train.len(),
        n_test: data.test.len(),
        dim: data.dim,
        curve,
    };
    emit(&report, cfg.paths.report.as_deref(), a.json, &text)
}

pub fn compare(mut cfg: RunConfig, a: CompareArgs) -> Result<()> {
    cfg.paths.report = a.report.or(cfg.paths.report);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.c = a.c.unwrap_or(cfg.c);
    cfg.permutations = a.runs.unwrap_or(cfg.permutations);
    cfg.validate()?;
    let loaded = a
        .triples
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, load_triples(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let datasets: Vec<NamedTriples<'_>> = loaded
        .iter()
        .map(|(name, records)| NamedTriples {
            name: name.clone(),
            records,
        })
        .collect();
    let cells = compare_encodings(&datasets, &a.encoders, RankConfig::with_c(cfg.c), cfg.permutations, cfg.seed)?;
    if let Some(p) = &a.csv {
        write_file(p, &encoding_csv(&cells))?;
    }
    let mut config = cfg.to_json();
    config["encoders"] = serde_json::to_value(&a.encoders).expect("encoders serialize");
    config["datasets"] = serde_json::to_value(&a.triples).expect("paths serialize");
    let text = encoding_text(&cells);
    let report = EncodingReport {
        v: REPORT_VERSION,
        config,
        cells,
    };
    emit(&report, cfg.paths.report.as_deref(), a.json, &text)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxJob {
    #[serde(default)]
    id: Option<String>,
    invoice: String,
    po: Vec<String>,
}

#[derive(Debug, Serialize)]
struct TaxCandidate {
    id: String,
    tokens: Vec<String>,
    score: f64,
}

#[derive(Debug, Serialize)]
struct TaxResult {
    id: String,
    invoice: String,
    candidates: Vec<TaxCandidate>,
    best: Option<String>,
}

#[derive(Debug, Serialize)]
struct TaxSummary {
    v: u32,
    config: serde_json::Value,
    results: Vec<TaxResult>,
}

pub fn taxmatch(mut cfg: RunConfig, a: TaxmatchArgs) -> Result<()> {
    cfg.paths.taxonomy = a.taxonomy.or(cfg.paths.taxonomy);
    cfg.paths.catalog = a.catalog.or(cfg.paths.catalog);
    cfg.paths.input = a.items.or(cfg.paths.input);
    cfg.validate()?;
    let taxonomy = Taxonomy::load(required(&cfg.paths.taxonomy, "taxonomy file")?)?;
    let catalog = match &cfg.paths.catalog {
        Some(p) => Catalog::load(p, &taxonomy)?,
        None => Catalog::new(Vec::new(), &taxonomy)?,
    };
    let matcher = TaxonomyMatcher::new(taxonomy, catalog);
    let jobs = match (a.invoice, &cfg.paths.input) {
        (Some(invoice), _) => vec![TaxJob {
            id: None,
            invoice,
            po: a.po,
        }],
        (None, Some(path)) => read_file(path)?
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| linematch::Error::Malformed(format!("{} line {}: {e}", path.display(), i + 1)).into())
            })
            .collect::<Result<Vec<TaxJob>>>()?,
        (None, None) => return Err(CliError::Usage("give --invoice with --po, or --items".into())),
    };
    let mut results = Vec::with_capacity(jobs.len());
    let mut text = String::new();
    for (n, job) in jobs.into_iter().enumerate() {
        let id = job.id.unwrap_or_else(|| format!("inv-{}", n + 1));
        let invoice = matcher.line_item(&id, &job.invoice)?;
        let po = job
            .po
            .iter()
            .enumerate()
            .map(|(i, t)| matcher.line_item(&format!("po-{}", i + 1), t))
            .collect::<linematch::Result<Vec<_>>>()?;
        let outcome = matcher.match_invoice(&invoice, &po);
        let candidates: Vec<TaxCandidate> = outcome
            .candidates
            .iter()
            .zip(&outcome.reports)
            .map(|(c, r)| TaxCandidate {
                id: c.id.clone(),
                tokens: c.tokens.clone(),
                score: r.score,
            })
            .collect();
        let best = outcome.best.map(|b| candidates[b].id.clone());
        text.push_str(&format!("{id}: {}\n", job.invoice));
        for c in &candidates {
            let mark = if Some(&c.id) == best.as_ref() { "  *" } else { "" };
            text.push_str(&format!("  {:<12} {:.4}  {}{mark}\n", c.id, c.score, c.tokens.join(" ")));
        }
        results.push(TaxResult {
            id,
            invoice: job.invoice,
            candidates,
            best,
        });
    }
    let report = TaxSummary {
        v: REPORT_VERSION,
        config: cfg.to_json(),
        results,
    };
    emit(&report, cfg.paths.report.as_deref(), a.json, &text)
}
