use linematch::corpus::{generate_products, product_triples, ProductParams, ProductVocabulary};
use linematch::eval::{compare_encodings, EncoderSpec, NamedTriples};
use linematch::ranker::RankConfig;

#[test]
fn hashed_encoding_keeps_trained_precision() {
    let vocab = ProductVocabulary::default();
    let items = generate_products(2000, &vocab, 5).unwrap();
    let triples = product_triples(&items, &vocab.lexicons().unwrap(), &ProductParams::default(), 5);
    let cells = compare_encodings(
        &[NamedTriples { name: "products".into(), records: &triples }],
        &[EncoderSpec::Exact, EncoderSpec::Hashed { dim: 1 << 15 }],
        RankConfig::default(),
        20,
        9,
    )
    .unwrap();
    assert_eq!(cells.len(), 2);
    let (exact, hashed) = (&cells[0], &cells[1]);
    assert_eq!(exact.runs, 20);
    assert!(exact.mean > exact.cosine_mean);
    assert!(
        (exact.mean - hashed.mean).abs() <= 0.03,
        "exact {:.4} vs hashed {:.4}",
        exact.mean,
        hashed.mean
    );
}
