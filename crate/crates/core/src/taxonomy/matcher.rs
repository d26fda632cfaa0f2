use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Catalog, NodeId, Taxonomy};
use crate::textprep::{tokenize, Description, Normalizer, Quantity, RawDescription, Source};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.8;

/// A normalized line item with the taxonomy products found in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineItem {
    pub id: String,
    pub tokens: Vec<String>,
    pub quantities: Vec<Quantity>,
    pub products: BTreeSet<NodeId>,
}

impl LineItem {
    pub fn token_set(&self) -> BTreeSet<String> {
        self.tokens.iter().cloned().collect()
    }
}

/// The token sets behind a [`TaxonomyMatcher::jsim`] score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsimReport {
    pub score: f64,
    /// Both items were empty, so the score is 0 by convention.
    pub degenerate: bool,
    /// Tokens present in both items.
    pub common: BTreeSet<String>,
    /// Invoice tokens matching the invoice products' entities/attributes.
    pub k1: BTreeSet<String>,
    /// PO tokens matching the PO products' entities/attributes.
    pub k2: BTreeSet<String>,
    /// All other tokens.
    pub k3: BTreeSet<String>,
    /// Unshared tokens of either side that take part in a related pair.
    pub k: BTreeSet<String>,
    pub k_star: BTreeSet<String>,
    pub denominator: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    /// PO items after merging the ones specialized by the invoice product.
    pub candidates: Vec<LineItem>,
    pub reports: Vec<JsimReport>,
    /// Highest-scoring candidate; the first one wins ties.
    pub best: Option<usize>,
}

fn trigrams(token: &str) -> HashMap<[char; 3], u32> {
    let padded: Vec<char> = std::iter::once('#')
        .chain(token.chars())
        .chain(std::iter::once('#'))
        .collect();
    let mut counts = HashMap::new();
    for w in padded.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_insert(0) += 1;
    }
    counts
}

/// Cosine of the `#`-padded character trigram counts of two tokens.
pub fn token_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let (ta, tb) = (trigrams(a), trigrams(b));
    let dot: u32 = ta.iter().filter_map(|(g, x)| tb.get(g).map(|y| x * y)).sum();
    let norm = |t: &HashMap<[char; 3], u32>| t.values().map(|x| (x * x) as f64).sum::<f64>().sqrt();
    let (na, nb) = (norm(&ta), norm(&tb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot as f64 / (na * nb)).min(1.0)
}

#[derive(Debug, Clone)]
pub struct TaxonomyMatcher {
    taxonomy: Taxonomy,
    catalog: Catalog,
    normalizer: Normalizer,
    threshold: f64,
    /// Tokenized node names, longest first.
    phrases: Vec<(Vec<String>, NodeId)>,
}

fn words(text: &str) -> impl Iterator<Item = String> {
    tokenize(text).into_iter().map(|t| t.text)
}

impl TaxonomyMatcher {
    pub fn new(taxonomy: Taxonomy, catalog: Catalog) -> Self {
        let mut phrases: Vec<(Vec<String>, NodeId)> = (0..taxonomy.len())
            .map(|id| (words(taxonomy.name(id)).collect::<Vec<_>>(), id))
            .filter(|(p, _)| !p.is_empty())
            .collect();
        phrases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
        let mut matcher = TaxonomyMatcher {
            taxonomy,
            catalog,
            normalizer: Normalizer::default(),
            threshold: DEFAULT_THRESHOLD,
            phrases,
        };
        matcher.normalizer = matcher.extend(Normalizer::default());
        matcher
    }

    fn extend(&self, mut normalizer: Normalizer) -> Normalizer {
        for id in 0..self.taxonomy.len() {
            for w in words(self.taxonomy.name(id)) {
                normalizer.lexicon.insert(w, 1);
            }
        }
        for e in self.catalog.entries() {
            for value in e.attributes.values() {
                for w in words(value) {
                    normalizer.lexicon.insert(w, 1);
                }
            }
        }
        normalizer
    }

    /// Uses `normalizer`, with the taxonomy and catalog vocabulary added.
    pub fn with_normalizer(mut self, normalizer: Normalizer) -> Self {
        self.normalizer = self.extend(normalizer);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fuzzy threshold must be in (0, 1], got {threshold}"
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Greedy left-to-right longest match of node names over `tokens`.
    pub fn extract_products(&self, tokens: &[String]) -> BTreeSet<NodeId> {
        let mut found = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self
                .phrases
                .iter()
                .find(|(p, _)| tokens[i..].starts_with(p));
            match hit {
                Some((p, id)) => {
                    found.insert(*id);
                    i += p.len();
                }
                None => i += 1,
            }
        }
        found
    }

    pub fn line_item_from(&self, desc: &Description) -> LineItem {
        LineItem {
            id: desc.id.clone(),
            tokens: desc.tokens.clone(),
            quantities: desc.quantities.clone(),
            products: self.extract_products(&desc.tokens),
        }
    }

    /// Normalizes `text` and resolves its products. Empty text yields an
    /// item without tokens.
    pub fn line_item(&self, id: &str, text: &str) -> Result<LineItem> {
        let raw = RawDescription::new(id, text, Source::Invoice);
        let desc = match self.normalizer.normalize(&raw) {
            Ok(d) => d,
            Err(Error::EmptyDescription(_)) => Description::from_text(id, text),
            Err(e) => return Err(e),
        };
        Ok(self.line_item_from(&desc))
    }

    /// Entity and attribute tokens of `products`, each with the products it
    /// belongs to.
    pub fn entity_tokens(&self, products: &BTreeSet<NodeId>) -> BTreeMap<String, BTreeSet<NodeId>> {
        let mut out: BTreeMap<String, BTreeSet<NodeId>> = BTreeMap::new();
        for &p in products {
            for w in words(self.taxonomy.name(p)) {
                out.entry(w).or_default().insert(p);
            }
            for e in self.catalog.entries_for(p) {
                for value in e.attributes.values() {
                    for w in words(value) {
                        out.entry(w).or_default().insert(p);
                    }
                }
            }
        }
        out
    }

    /// Tokens of `item` matching one of its entity tokens, with the matches.
    fn matched(&self, item: &LineItem) -> BTreeMap<String, BTreeSet<String>> {
        let entities = self.entity_tokens(&item.products);
        let mut out = BTreeMap::new();
        for t in item.token_set() {
            let hits: BTreeSet<String> = entities
                .keys()
                .filter(|e| token_similarity(&t, e) >= self.threshold)
                .cloned()
                .collect();
            if !hits.is_empty() {
                out.insert(t, hits);
            }
        }
        out
    }

    fn owners(&self, item: &LineItem, matches: &BTreeSet<String>) -> BTreeSet<NodeId> {
        let entities = self.entity_tokens(&item.products);
        matches
            .iter()
            .filter_map(|e| entities.get(e))
            .flatten()
            .copied()
            .collect()
    }

    /// Merges every PO item whose product the invoice product generalizes
    /// into one item at the position of the first; the rest pass through.
    pub fn combine_po_items(&self, po_items: &[LineItem], invoice: &LineItem) -> Vec<LineItem> {
        let specialized = |item: &LineItem| {
            invoice
                .products
                .iter()
                .any(|&g| item.products.iter().any(|&s| self.taxonomy.generalizes(g, s)))
        };
        let merge: Vec<usize> = (0..po_items.len()).filter(|&i| specialized(&po_items[i])).collect();
        if merge.len() < 2 {
            return po_items.to_vec();
        }
        let mut merged = LineItem {
            id: merge.iter().map(|&i| po_items[i].id.as_str()).collect::<Vec<_>>().join("+"),
            tokens: Vec::new(),
            quantities: Vec::new(),
            products: BTreeSet::new(),
        };
        for &i in &merge {
            merged.tokens.extend(po_items[i].tokens.iter().cloned());
            merged.quantities.extend(po_items[i].quantities.iter().cloned());
            merged.products.extend(po_items[i].products.iter().copied());
        }
        let mut out = Vec::with_capacity(po_items.len() - merge.len() + 1);
        let mut merged = Some(merged);
        for (i, item) in po_items.iter().enumerate() {
            if merge.contains(&i) {
                if let Some(m) = merged.take() {
                    out.push(m);
                }
            } else {
                out.push(item.clone());
            }
        }
        out
    }

    /// Taxonomy-aware Jaccard similarity in [0, 1].
    ///
    /// `k1`/`k2` are the tokens of each side that fuzzy-match (at the
    /// threshold) an entity or attribute token of that side's own products.
    /// An unshared invoice token of `k1` and an unshared PO token of `k2` are
    /// related when they matched a common entity token or their products
    /// are taxonomy-related (either direction). The related tokens of both
    /// sides form `k`. The numerator is the shared tokens plus the invoice
    /// side of `k`; the denominator is all tokens minus `k`, plus the
    /// invoice side of `k`, so that a related pair counts once.
    pub fn jsim(&self, invoice: &LineItem, po: &LineItem) -> JsimReport {
        let ti = invoice.token_set();
        let tp = po.token_set();
        let common: BTreeSet<String> = ti.intersection(&tp).cloned().collect();
        let mi = self.matched(invoice);
        let mp = self.matched(po);
        let k1: BTreeSet<String> = mi.keys().cloned().collect();
        let k2: BTreeSet<String> = mp.keys().cloned().collect();
        let all: BTreeSet<String> = ti.union(&tp).cloned().collect();
        let k3: BTreeSet<String> = all
            .iter()
            .filter(|t| !k1.contains(*t) && !k2.contains(*t))
            .cloned()
            .collect();

        let mut k_inv = BTreeSet::new();
        let mut k = BTreeSet::new();
        for (x, xm) in mi.iter().filter(|(x, _)| !common.contains(*x)) {
            let xo = self.owners(invoice, xm);
            for (y, ym) in mp.iter().filter(|(y, _)| !common.contains(*y)) {
                let related = !xm.is_disjoint(ym) || {
                    let yo = self.owners(po, ym);
                    xo.iter().any(|&a| yo.iter().any(|&b| self.taxonomy.related(a, b)))
                };
                if related {
                    k_inv.insert(x.clone());
                    k.insert(x.clone());
                    k.insert(y.clone());
                }
            }
        }
        let k_star: BTreeSet<String> = common.union(&k_inv).cloned().collect();
        let denominator: BTreeSet<String> = all
            .iter()
            .filter(|t| !k.contains(*t))
            .chain(k_inv.iter())
            .cloned()
            .collect();
        let degenerate = denominator.is_empty();
        let score = if degenerate {
            0.0
        } else {
            k_star.len() as f64 / denominator.len() as f64
        };
        JsimReport {
            score,
            degenerate,
            common,
            k1,
            k2,
            k3,
            k,
            k_star,
            denominator,
        }
    }

    /// Merges the PO items for `invoice`, then scores each candidate.
    pub fn match_invoice(&self, invoice: &LineItem, po_items: &[LineItem]) -> MatchOutcome {
        let candidates = self.combine_po_items(po_items, invoice);
        let reports: Vec<JsimReport> = candidates.iter().map(|c| self.jsim(invoice, c)).collect();
        let mut best: Option<usize> = None;
        for (i, r) in reports.iter().enumerate() {
            if best.is_none_or(|b| r.score > reports[b].score) {
                best = Some(i);
            }
        }
        MatchOutcome {
            candidates,
            reports,
            best,
        }
    }
}
