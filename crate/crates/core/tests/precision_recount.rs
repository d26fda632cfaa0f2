use linematch::eval::{precision, CosineScorer};
use linematch::ranker::{RankConfig, RankModel, Triple};
use linematch::SparseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> SparseVector {
    let entries: Vec<(u32, f64)> = (0..3).map(|_| (rng.gen_range(0..dim as u32), rng.gen_range(-1.0..1.0))).collect();
    SparseVector::from_unsorted(dim, entries)
}

/// Counts wins by re-deriving each score from the dense matrix.
fn recount(w: &[f64], dim: usize, triples: &[Triple]) -> usize {
    let f = |a: &SparseVector, b: &SparseVector| {
        let (a, b) = (a.to_dense(), b.to_dense());
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                s += a[i] * w[i * dim + j] * b[j];
            }
        }
        s
    };
    let mut wins = 0;
    for t in triples {
        if f(&t.query, &t.preferred) > f(&t.query, &t.less_preferred) {
            wins += 1;
        }
    }
    wins
}

#[test]
fn precision_matches_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dim = 6;
    let triples: Vec<Triple> = (0..100)
        .map(|_| Triple::new(random_vector(&mut rng, dim), random_vector(&mut rng, dim), random_vector(&mut rng, dim)))
        .collect();
    let mut model = RankModel::new(dim, RankConfig::with_c(0.25)).unwrap();
    model.train_stream(&triples[..30]).unwrap();
    let r = precision(&model, &triples).unwrap();
    assert_eq!(r.n_correct, recount(&model.to_dense_matrix(), dim, &triples));
    assert_eq!(r.margins.len(), 100);
    assert_eq!(r.n_correct, r.margins.iter().filter(|m| **m > 0.0).count());
}

#[test]
fn engineered_ties_are_misses() {
    let e = |i: usize| SparseVector::from_dense(&(0..4).map(|k| if k == i { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    let triples = vec![
        Triple::new(e(0), e(0), e(1)), // win
        Triple::new(e(0), e(1), e(2)), // 0 vs 0 tie
        Triple::new(e(0), e(2), e(2)), // identical candidates
        Triple::new(e(0), e(3), e(0)), // loss
    ];
    let r = precision(&CosineScorer, &triples).unwrap();
    assert_eq!(r.n_correct, 1);
    assert_eq!(r.precision, 0.25);
    let model = RankModel::new(4, RankConfig::default()).unwrap();
    assert_eq!(precision(&model, &triples).unwrap(), r);
}
