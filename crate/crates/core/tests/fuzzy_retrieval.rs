use std::collections::{HashMap, HashSet};

use linematch::fuzzy::{AlternateStrategy, CandidatePool};
use linematch::Description;

const QUERY: &str = "TRES 739mL CD KER Smooth";
const POOL: [(&str, &str); 3] = [
    ("po-1", "TRES 0.739L CD KER Smth"),
    ("po-2", "Tres Soya Smooth Conditioner 150 gm"),
    ("po-3", "Tropicana 100% Apple Juice - 1L"),
];

fn pool() -> CandidatePool {
    CandidatePool::build(POOL.iter().map(|(id, t)| Description::from_text(*id, t)).collect()).unwrap()
}

/// Char 2- and 3-grams of the lowercased, space-joined tokens.
fn grams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for n in 2..=3 {
        for w in chars.windows(n) {
            out.push(w.iter().collect());
        }
    }
    out
}

/// Straightforward tf-idf cosine with idf = ln((1+N)/(1+df)) + 1.
fn oracle_cosines(query: &str, docs: &[&str]) -> Vec<f64> {
    let n = docs.len() as f64;
    let mut df: HashMap<String, f64> = HashMap::new();
    for d in docs {
        let uniq: HashSet<String> = grams(d).into_iter().collect();
        for g in uniq {
            *df.entry(g).or_default() += 1.0;
        }
    }
    let weigh = |text: &str| -> HashMap<String, f64> {
        let mut tf: HashMap<String, f64> = HashMap::new();
        for g in grams(text) {
            if df.contains_key(&g) {
                *tf.entry(g).or_default() += 1.0;
            }
        }
        for (g, w) in tf.iter_mut() {
            *w *= ((1.0 + n) / (1.0 + df[g])).ln() + 1.0;
        }
        tf
    };
    let q = weigh(query);
    let qn: f64 = q.values().map(|x| x * x).sum::<f64>().sqrt();
    docs.iter()
        .map(|d| {
            let v = weigh(d);
            let vn: f64 = v.values().map(|x| x * x).sum::<f64>().sqrt();
            let dot: f64 = q.iter().filter_map(|(g, x)| v.get(g).map(|y| x * y)).sum();
            dot / (qn * vn)
        })
        .collect()
}

#[test]
fn table_one_top_match_agrees_with_oracle() {
    let pool = pool();
    let query = Description::from_text("q", QUERY);
    let normalized: Vec<String> = POOL.iter().map(|(_, t)| Description::from_text("", t).normalized_text).collect();
    let docs: Vec<&str> = normalized.iter().map(String::as_str).collect();
    let expected = oracle_cosines(&query.normalized_text, &docs);

    let ranked = pool.rank_all(&query);
    assert_eq!(ranked[0].id, "po-1");
    assert_eq!(ranked[1].id, "po-2");
    for r in &ranked[..2] {
        assert!(r.gate_passed);
        assert!((r.fuzzy_score - expected[r.index]).abs() < 1e-12, "{} vs {}", r.fuzzy_score, expected[r.index]);
    }
    assert!(expected[0] > expected[1]);
    // Different head nouns: the juice line is gated out.
    assert!(!ranked[2].gate_passed);
    assert_eq!(ranked[2].fuzzy_score, 0.0);

    let top = pool.top_k(&query, 1).unwrap();
    assert_eq!(top.len(), 1);
    assert_eq!(top[0].id, "po-1");
}

#[test]
fn table_one_alternate_after_rejection() {
    let pool = pool();
    let query = Description::from_text("q", QUERY);
    let exclude: HashSet<String> = ["po-1".to_string()].into();
    let alt = pool.next_alternate(&query, &exclude, AlternateStrategy::SecondBest, 0).unwrap();
    assert_eq!(alt.description.id, "po-2");
    assert_eq!(alt.description.original_text, "Tres Soya Smooth Conditioner 150 gm");
}

#[test]
fn pool_is_deterministic() {
    let query = Description::from_text("q", QUERY);
    assert_eq!(pool().rank_all(&query), pool().rank_all(&query));
    assert_eq!(pool().vocabulary().to_json(), pool().vocabulary().to_json());
}
