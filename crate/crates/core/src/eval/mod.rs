//! Triple precision, averaged learning curves and encoding comparisons.

mod report;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use report::{curve_csv, curve_text, encoding_csv, encoding_text, CurveReport, EncodingReport};

use crate::corpus::recipes::item_seed;
use crate::corpus::{split_indices, TripleRecord};
use crate::ranker::{RankConfig, RankModel, Triple};
use crate::textprep::{Description, Normalizer};
use crate::vectorizer::{cosine, Encoder, HashingVectorizer, NgramConfig, SparseVector, Vocabulary};
use crate::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 20;
pub const DEFAULT_CHECKPOINTS: usize = 10;

/// Anything that scores a pair of vectors.
pub trait Scorer {
    fn score(&self, a: &SparseVector, b: &SparseVector) -> Result<f64>;

    /// `(score(s, s_j), score(s, s_i))`.
    fn triple_scores(&self, t: &Triple) -> Result<(f64, f64)> {
        Ok((self.score(&t.query, &t.preferred)?, self.score(&t.query, &t.less_preferred)?))
    }
}

impl Scorer for RankModel {
    fn score(&self, a: &SparseVector, b: &SparseVector) -> Result<f64> {
        RankModel::score(self, a, b)
    }

    fn triple_scores(&self, t: &Triple) -> Result<(f64, f64)> {
        RankModel::triple_scores(self, t)
    }
}

/// The untrained baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineScorer;

impl Scorer for CosineScorer {
    fn score(&self, a: &SparseVector, b: &SparseVector) -> Result<f64> {
        cosine(a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub n_triples: usize,
    /// Triples with `score(s, s_j) > score(s, s_i)`; ties are misses.
    pub n_correct: usize,
    pub precision: f64,
    /// `score(s, s_j) - score(s, s_i)` per triple.
    pub margins: Vec<f64>,
}

pub fn precision<S: Scorer + ?Sized>(scorer: &S, triples: &[Triple]) -> Result<PrecisionReport> {
    if triples.is_empty() {
        return Err(Error::EmptyInput("precision needs at least one triple"));
    }
    let mut n_correct = 0;
    let mut margins = Vec::with_capacity(triples.len());
    for t in triples {
        let (pos, neg) = scorer.triple_scores(t)?;
        if pos > neg {
            n_correct += 1;
        }
        margins.push(pos - neg);
    }
    Ok(PrecisionReport {
        n_triples: triples.len(),
        n_correct,
        precision: n_correct as f64 / triples.len() as f64,
        margins,
    })
}

/// `count` evenly spaced sample counts from 0 to `n` inclusive.
pub fn default_checkpoints(n: usize, count: usize) -> Vec<usize> {
    match count {
        0 => Vec::new(),
        1 => vec![n],
        _ => {
            let mut c: Vec<usize> = (0..count).map(|i| i * n / (count - 1)).collect();
            c.dedup();
            c
        }
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub samples: usize,
    pub mean: f64,
    /// Sample standard deviation over permutations.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    pub n_permutations: usize,
    pub seed: u64,
    /// Cosine precision on the same test triples.
    pub cosine_precision: f64,
    /// Test precision per permutation (rows) and checkpoint (columns).
    pub runs: Vec<Vec<f64>>,
}

impl LearningCurve {
    pub fn final_mean(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub n_permutations: usize,
    /// Sample counts to evaluate at; evenly spaced when absent.
    pub checkpoints: Option<Vec<usize>>,
    pub seed: u64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            n_permutations: DEFAULT_PERMUTATIONS,
            checkpoints: None,
            seed: 0,
        }
    }
}

/// Trains a fresh model per permutation of `train` and records test
/// precision at each checkpoint.
pub fn learning_curve<F>(factory: F, train: &[Triple], test: &[Triple], opts: &CurveOptions) -> Result<LearningCurve>
where
    F: Fn() -> Result<RankModel>,
{
    if opts.n_permutations == 0 {
        return Err(Error::InvalidParameter("need at least one permutation".into()));
    }
    let mut checkpoints = opts
        .checkpoints
        .clone()
        .unwrap_or_else(|| default_checkpoints(train.len(), DEFAULT_CHECKPOINTS));
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.last().is_some_and(|&c| c > train.len()) {
        return Err(Error::InvalidParameter(format!(
            "checkpoint beyond the {} training triples",
            train.len()
        )));
    }
    let cosine_precision = precision(&CosineScorer, test)?.precision;
    let mut runs = Vec::with_capacity(opts.n_permutations);
    for p in 0..opts.n_permutations {
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(item_seed(opts.seed, p)));
        let mut model = factory()?;
        let mut seen = 0;
        let mut row = Vec::with_capacity(checkpoints.len());
        for &c in &checkpoints {
            while seen < c {
                model.update(&train[order[seen]])?;
                seen += 1;
            }
            row.push(precision(&model, test)?.precision);
        }
        runs.push(row);
    }
    let points = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &samples)| {
            let col: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            let (mean, std) = mean_std(&col);
            CurvePoint { samples, mean, std }
        })
        .collect();
    Ok(LearningCurve {
        points,
        n_permutations: opts.n_permutations,
        seed: opts.seed,
        cosine_precision,
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderSpec {
    /// Exact tf-idf vocabulary.
    Exact,
    /// Hashed tf-idf with `dim` buckets.
    Hashed { dim: usize },
}

impl EncoderSpec {
    pub fn name(&self) -> String {
        match self {
            EncoderSpec::Exact => "tfidf".into(),
            EncoderSpec::Hashed { dim } => format!("tfidf-hashed-{dim}"),
        }
    }

    pub fn fit<'a, I>(&self, corpus: I, config: NgramConfig) -> Result<Box<dyn Encoder>>
    where
        I: IntoIterator<Item = &'a Description>,
    {
        Ok(match *self {
            EncoderSpec::Exact => Box::new(Vocabulary::fit(corpus, config)?),
            EncoderSpec::Hashed { dim } => Box::new(HashingVectorizer::fit(corpus, config, dim)?),
        })
    }
}

/// Encoded train/test triples.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dim: usize,
    pub train: Vec<Triple>,
    pub test: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub split_seed: u64,
    pub encoder: EncoderSpec,
    pub ngrams: NgramConfig,
    /// Lexically normalize with a lexicon built from the training strings.
    pub normalize: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            split_seed: 0,
            encoder: EncoderSpec::Exact,
            ngrams: NgramConfig::ranker(),
            normalize: true,
        }
    }
}

/// Splits `records` 2:1, fits the encoder on the training strings and
/// encodes every triple.
pub fn encode_dataset(records: &[TripleRecord], opts: &DatasetOptions) -> Result<Dataset> {
    if records.len() < 2 {
        return Err(Error::EmptyInput("need at least two triples to split"));
    }
    let split = split_indices(records.len(), opts.split_seed);
    let strings = |idx: &[usize]| -> Vec<&str> {
        idx.iter()
            .flat_map(|&i| [records[i].s.as_str(), records[i].s_j.as_str(), records[i].s_i.as_str()])
            .collect()
    };
    let normalizer = if opts.normalize {
        Normalizer::from_corpus(strings(&split.train))
    } else {
        Normalizer::default()
    };
    let describe = |text: &str| -> Description {
        normalizer
            .normalize_text("", text)
            .unwrap_or_else(|_| Description::from_text("", text))
    };
    let describe_all = |idx: &[usize]| -> Vec<[Description; 3]> {
        idx.iter()
            .map(|&i| [&records[i].s, &records[i].s_j, &records[i].s_i].map(|t| describe(t)))
            .collect()
    };
    let train_desc = describe_all(&split.train);
    let test_desc = describe_all(&split.test);
    let encoder = opts.encoder.fit(train_desc.iter().flatten(), opts.ngrams)?;
    let encode = |descs: &[[Description; 3]]| -> Vec<Triple> {
        descs
            .iter()
            .map(|[s, sj, si]| Triple::new(encoder.encode(s), encoder.encode(sj), encoder.encode(si)))
            .collect()
    };
    Ok(Dataset {
        dim: encoder.dim(),
        train: encode(&train_desc),
        test: encode(&test_desc),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingCell {
    pub dataset: String,
    pub encoder: String,
    pub runs: usize,
    /// Final trained test precision, mean and sample std over runs.
    pub mean: f64,
    pub std: f64,
    pub cosine_mean: f64,
}

pub struct NamedTriples<'a> {
    pub name: String,
    pub records: &'a [TripleRecord],
}

/// For each dataset and encoder, `runs` times: split with a per-run seed,
/// train on a shuffled training stream, and measure final test precision.
pub fn compare_encodings(
    datasets: &[NamedTriples<'_>],
    encoders: &[EncoderSpec],
    rank: RankConfig,
    runs: usize,
    seed: u64,
) -> Result<Vec<EncodingCell>> {
    if encoders.is_empty() {
        return Err(Error::EmptyInput("need at least one encoder"));
    }
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    let mut cells = Vec::new();
    for ds in datasets {
        for enc in encoders {
            let mut finals = Vec::with_capacity(runs);
            let mut cosines = Vec::with_capacity(runs);
            for r in 0..runs {
                let opts = DatasetOptions {
                    split_seed: item_seed(seed, r),
                    encoder: *enc,
                    ..Default::default()
                };
                let data = encode_dataset(ds.records, &opts)?;
                let curve = learning_curve(
                    || RankModel::new(data.dim, rank),
                    &data.train,
                    &data.test,
                    &CurveOptions {
                        n_permutations: 1,
                        checkpoints: Some(vec![data.train.len()]),
                        seed: item_seed(seed ^ 0x5eed, r),
                    },
                )?;
                finals.push(curve.final_mean());
                cosines.push(curve.cosine_precision);
            }
            let (mean, std) = mean_std(&finals);
            cells.push(EncodingCell {
                dataset: ds.name.clone(),
                encoder: enc.name(),
                runs,
                mean,
                std,
                cosine_mean: mean_std(&cosines).0,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> SparseVector {
        SparseVector::from_dense(x)
    }

    struct Fixed(Vec<(f64, f64)>, std::cell::Cell<usize>);

    impl Scorer for Fixed {
        fn score(&self, _: &SparseVector, _: &SparseVector) -> Result<f64> {
            unreachable!()
        }

        fn triple_scores(&self, _: &Triple) -> Result<(f64, f64)> {
            let i = self.1.get();
            self.1.set(i + 1);
            Ok(self.0[i])
        }
    }

    #[test]
    fn ties_are_misses() {
        let t = Triple::new(v(&[1.0]), v(&[1.0]), v(&[1.0]));
        let s = Fixed(vec![(0.7, 0.5), (0.3, 0.3), (0.1, 0.2)], Default::default());
        let r = precision(&s, &[t.clone(), t.clone(), t]).unwrap();
        assert_eq!(r.n_correct, 1);
        assert_eq!(r.precision, 1.0 / 3.0);
        assert!(precision(&CosineScorer, &[]).is_err());
    }

    #[test]
    fn self_similarity_wins() {
        let s = v(&[0.6, 0.8, 0.0]);
        let t = Triple::new(s.clone(), s.clone(), v(&[0.0, 0.6, 0.8]));
        assert_eq!(precision(&CosineScorer, &[t]).unwrap().n_correct, 1);
    }

    #[test]
    fn checkpoints() {
        assert_eq!(default_checkpoints(9, 10), (0..=9).collect::<Vec<_>>());
        assert_eq!(default_checkpoints(90, 10), (0..=9).map(|i| i * 10).collect::<Vec<_>>());
        assert_eq!(default_checkpoints(3, 10), [0, 1, 2, 3]);
        assert_eq!(default_checkpoints(5, 1), [5]);
    }

    #[test]
    fn mean_and_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
    }

    #[test]
    fn curve_shapes_and_checkpoint_zero() {
        let t = |a: &[f64], b: &[f64], c: &[f64]| Triple::new(v(a), v(b), v(c));
        let train = vec![t(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]); 4];
        let test = vec![t(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0])];
        let opts = CurveOptions { n_permutations: 3, checkpoints: None, seed: 1 };
        let c = learning_curve(|| RankModel::new(2, RankConfig::with_c(10.0)), &train, &test, &opts).unwrap();
        assert_eq!(c.points.iter().map(|p| p.samples).collect::<Vec<_>>(), [0, 1, 2, 3, 4]);
        assert_eq!(c.points[0].mean, c.cosine_precision);
        assert_eq!(c.points[0].mean, 0.0);
        assert_eq!(c.final_mean(), 1.0);
        assert_eq!(c, learning_curve(|| RankModel::new(2, RankConfig::with_c(10.0)), &train, &test, &opts).unwrap());
        let bad = CurveOptions { checkpoints: Some(vec![5]), ..opts };
        assert!(learning_curve(|| RankModel::new(2, RankConfig::default()), &train, &test, &bad).is_err());
    }
}
