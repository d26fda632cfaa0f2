//! Brute-force Jsim over plain parent lists, shared by the integration and
//! acceptance suites.

use std::collections::{BTreeMap, BTreeSet};

use linematch::taxonomy::{Catalog, CatalogEntry, NodeSpec, Taxonomy, TaxonomyMatcher, DEFAULT_THRESHOLD};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const WORDS: &[&str] = &[
    "oil", "edible", "coconut", "sunflower", "mustard", "diesel", "fuel", "black", "apple", "mobile",
    "phone", "red", "blue", "soap", "bath", "men", "women", "lt", "kg", "5", "2", "oill", "coconnut",
    "phones", "soaps", "mobil",
];

pub const NODE_WORDS: &[&str] = &[
    "oil", "edible", "coconut", "sunflower", "mustard", "diesel", "fuel", "apple", "mobile", "phone",
    "soap", "bath",
];

/// A taxonomy held as plain parent lists, with its own reachability.
pub struct Oracle {
    pub names: Vec<Vec<String>>,
    pub parents: Vec<Vec<usize>>,
    pub attributes: Vec<Vec<String>>,
}

impl Oracle {
    fn is_ancestor(&self, general: usize, specific: usize) -> bool {
        let mut stack = vec![specific];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == general {
                return true;
            }
            if seen.insert(n) {
                stack.extend(&self.parents[n]);
            }
        }
        false
    }

    pub fn products(&self, tokens: &[String]) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut best: Option<(usize, usize)> = None;
            for (id, name) in self.names.iter().enumerate() {
                let fits = i + name.len() <= tokens.len() && tokens[i..i + name.len()] == name[..];
                if fits && best.is_none_or(|(_, len)| name.len() > len) {
                    best = Some((id, name.len()));
                }
            }
            match best {
                Some((id, len)) => {
                    out.insert(id);
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    fn entities(&self, products: &BTreeSet<usize>) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for &p in products {
            for w in &self.names[p] {
                out.push((w.clone(), p));
            }
            for w in &self.attributes[p] {
                out.push((w.clone(), p));
            }
        }
        out
    }
}

fn sim(a: &str, b: &str) -> f64 {
    let tri = |s: &str| {
        let c: Vec<char> = format!("#{s}#").chars().collect();
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for w in c.windows(3) {
            *m.entry(w.iter().collect()).or_default() += 1.0;
        }
        m
    };
    let (x, y) = (tri(a), tri(b));
    let dot: f64 = x.iter().map(|(g, v)| v * y.get(g).copied().unwrap_or(0.0)).sum();
    let n = |m: &BTreeMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    if a == b {
        1.0
    } else {
        (dot / (n(&x) * n(&y))).min(1.0)
    }
}

pub fn oracle_jsim(o: &Oracle, inv: &[String], po: &[String]) -> f64 {
    let ti: BTreeSet<String> = inv.iter().cloned().collect();
    let tp: BTreeSet<String> = po.iter().cloned().collect();
    let ei = o.entities(&o.products(inv));
    let ep = o.entities(&o.products(po));
    let matches = |t: &str, ents: &[(String, usize)]| -> Vec<(String, usize)> {
        ents.iter().filter(|(e, _)| sim(t, e) >= DEFAULT_THRESHOLD).cloned().collect()
    };
    let k1: BTreeSet<String> = ti.iter().filter(|t| !matches(t, &ei).is_empty()).cloned().collect();
    let k2: BTreeSet<String> = tp.iter().filter(|t| !matches(t, &ep).is_empty()).cloned().collect();
    let everything: BTreeSet<String> = ti.union(&tp).cloned().collect();
    let k3: BTreeSet<String> = everything.iter().filter(|t| !k1.contains(*t) && !k2.contains(*t)).cloned().collect();
    let mut k = BTreeSet::new();
    let mut k_inv = BTreeSet::new();
    for x in &k1 {
        if tp.contains(x) {
            continue;
        }
        for y in &k2 {
            if ti.contains(y) {
                continue;
            }
            let mx = matches(x, &ei);
            let my = matches(y, &ep);
            let shared = mx.iter().any(|(a, _)| my.iter().any(|(b, _)| a == b));
            let related = mx
                .iter()
                .any(|(_, a)| my.iter().any(|(_, b)| o.is_ancestor(*a, *b) || o.is_ancestor(*b, *a)));
            if shared || related {
                k.insert(x.clone());
                k.insert(y.clone());
                k_inv.insert(x.clone());
            }
        }
    }
    let union: BTreeSet<String> = k1.iter().chain(&k2).chain(&k3).cloned().collect();
    let common: BTreeSet<String> = ti.intersection(&tp).cloned().collect();
    let numerator: BTreeSet<String> = common.union(&k_inv).cloned().collect();
    let denominator: BTreeSet<String> = union.difference(&k).cloned().chain(k_inv.iter().cloned()).collect();
    if denominator.is_empty() {
        0.0
    } else {
        numerator.len() as f64 / denominator.len() as f64
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (Oracle, TaxonomyMatcher) {
    let n = rng.gen_range(2..=7);
    let mut names: Vec<Vec<String>> = Vec::new();
    while names.len() < n {
        let len = rng.gen_range(1..=2);
        let name: Vec<String> = NODE_WORDS.choose_multiple(rng, len).map(|w| w.to_string()).collect();
        if !names.contains(&name) {
            names.push(name);
        }
    }
    let parents: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..i).filter(|_| rng.gen_bool(0.4)).collect())
        .collect();
    let attributes: Vec<Vec<String>> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                let k = rng.gen_range(1..=2);
                WORDS.choose_multiple(rng, k).map(|w| w.to_string()).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let specs: Vec<NodeSpec> = (0..n)
        .map(|i| NodeSpec {
            name: names[i].join(" "),
            parents: parents[i].iter().map(|&p| names[p].join(" ")).collect(),
        })
        .collect();
    let taxonomy = Taxonomy::from_nodes(specs).unwrap();
    let entries: Vec<CatalogEntry> = (0..n)
        .filter(|&i| !attributes[i].is_empty())
        .map(|i| CatalogEntry {
            product: names[i].join(" "),
            attributes: attributes[i].iter().enumerate().map(|(k, v)| (format!("a{k}"), v.clone())).collect(),
        })
        .collect();
    let catalog = Catalog::new(entries, &taxonomy).unwrap();
    (Oracle { names, parents, attributes }, TaxonomyMatcher::new(taxonomy, catalog))
}

pub fn random_text(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(1..=12);
    (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// The oils hierarchy: oil > edible oil > {coconut, sunflower, mustard} oil,
/// and oil > diesel oil.
pub fn oils() -> (Oracle, TaxonomyMatcher) {
    let names = ["oil", "edible oil", "coconut oil", "sunflower oil", "mustard oil", "diesel oil"];
    let parents: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![1], vec![1], vec![0]];
    let specs = names
        .iter()
        .zip(&parents)
        .map(|(n, ps)| NodeSpec {
            name: n.to_string(),
            parents: ps.iter().map(|&p| names[p].to_string()).collect(),
        })
        .collect();
    let taxonomy = Taxonomy::from_nodes(specs).unwrap();
    let catalog = Catalog::new(Vec::new(), &taxonomy).unwrap();
    let oracle = Oracle {
        names: names.iter().map(|n| n.split(' ').map(str::to_string).collect()).collect(),
        parents,
        attributes: vec![Vec::new(); names.len()],
    };
    (oracle, TaxonomyMatcher::new(taxonomy, catalog))
}
