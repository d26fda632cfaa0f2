//! Triple recipes for invoice strings, product descriptions and labeled
//! sentence pairs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rules::{self, Antonyms, BrandOutcome, Rule, RuleApplication, Target};
use super::{PairLabel, TripleRecord};
use crate::textprep::Description;
use crate::vectorizer::{cosine, NgramConfig, Vocabulary};
use crate::{Error, Result};

/// A description that no selected rule could perturb.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub text: String,
    pub reason: String,
}

/// Per-item seed derived from a run seed (splitmix64 finalizer).
pub fn item_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn count<R: Rng>(rng: &mut R, range: (usize, usize)) -> usize {
    rng.gen_range(range.0..=range.1.max(range.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvoiceParams {
    /// Rules the recipe may use.
    pub rules: BTreeSet<Rule>,
    /// Chance of light edits on the second string when rule 2 already applied.
    pub p_second_edit: f64,
    pub second_edits: (usize, usize),
    pub third_edits: (usize, usize),
    pub antonyms: Antonyms,
    /// Replacement nouns for rule 5; rule 5 is unavailable when empty.
    pub products: Vec<String>,
}

impl Default for InvoiceParams {
    fn default() -> Self {
        InvoiceParams {
            rules: [Rule::Antonym, Rule::SmallDelta, Rule::LargeDelta, Rule::Product, Rule::Edit].into(),
            p_second_edit: 0.5,
            second_edits: (1, 2),
            third_edits: (3, 5),
            antonyms: Antonyms::default(),
            products: Vec::new(),
        }
    }
}

/// Invoice recipe: the second string is a small numeric perturbation
/// and/or light edit of `s`; the third string is derived from the second by
/// a large numeric perturbation plus one random rule among 1, 5 and 6.
pub fn derive_second_third(s: &str, params: &InvoiceParams, seed: u64) -> std::result::Result<TripleRecord, Skip> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let has = |r: Rule| params.rules.contains(&r);
    let mut applied = Vec::new();
    let mut push = |target, rule| applied.push(RuleApplication { target, rule });

    let mut sj = rules::split_words(s);
    let mut second = false;
    if has(Rule::SmallDelta) && rules::small_delta(&mut sj, &mut rng) {
        push(Target::SecondString, Rule::SmallDelta);
        second = true;
    }
    if has(Rule::Edit) && (!second || rng.gen_bool(params.p_second_edit)) {
        let n = count(&mut rng, params.second_edits);
        if rules::char_edits(&mut sj, n, &mut rng) > 0 {
            push(Target::SecondString, Rule::Edit);
        }
    }

    let mut si = sj.clone();
    let mut third = false;
    if has(Rule::LargeDelta) && rules::large_delta(&mut si, &mut rng) {
        push(Target::ThirdString, Rule::LargeDelta);
        third = true;
    }
    let mut extras = Vec::new();
    if has(Rule::Antonym) && si.iter().any(|w| params.antonyms.get(w).is_some()) {
        extras.push(Rule::Antonym);
    }
    if has(Rule::Product) && !params.products.is_empty() && rules::product_position(&si).is_some() {
        extras.push(Rule::Product);
    }
    if has(Rule::Edit) && si.iter().any(|w| w.chars().any(char::is_alphabetic)) {
        extras.push(Rule::Edit);
    }
    if let Some(&rule) = extras.choose(&mut rng) {
        let ok = match rule {
            Rule::Antonym => rules::antonym(&mut si, &params.antonyms, &mut rng),
            Rule::Product => rules::replace_product(&mut si, &params.products, &mut rng),
            _ => {
                let n = count(&mut rng, params.third_edits);
                rules::char_edits(&mut si, n, &mut rng) > 0
            }
        };
        if ok {
            push(Target::ThirdString, rule);
            third = true;
        }
    }
    if !third {
        return Err(Skip {
            text: s.to_string(),
            reason: "no perturbable content for the third string".into(),
        });
    }
    Ok(TripleRecord {
        s: s.to_string(),
        s_j: sj.join(" "),
        s_i: si.join(" "),
        rules: applied,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductLexicons {
    brands: Vec<String>,
    products: Vec<String>,
}

impl ProductLexicons {
    pub fn new(brands: Vec<String>, products: Vec<String>) -> Result<Self> {
        if brands.is_empty() || products.is_empty() {
            return Err(Error::InvalidParameter("brand and product lexicons must be non-empty".into()));
        }
        Ok(ProductLexicons { brands, products })
    }

    pub fn brands(&self) -> &[String] {
        &self.brands
    }

    pub fn products(&self) -> &[String] {
        &self.products
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductParams {
    pub p_small_delta: f64,
    pub p_second_edit: f64,
    pub p_antonym: f64,
    pub p_product: f64,
    pub p_third_edit: f64,
    pub second_edits: (usize, usize),
    pub third_edits: (usize, usize),
    pub antonyms: Antonyms,
    /// Treat the first word as the brand when no lexicon brand is present.
    pub first_word_brand: bool,
}

impl Default for ProductParams {
    fn default() -> Self {
        ProductParams {
            p_small_delta: 0.5,
            p_second_edit: 0.5,
            p_antonym: 0.5,
            p_product: 0.5,
            p_third_edit: 0.5,
            second_edits: (1, 2),
            third_edits: (3, 5),
            antonyms: Antonyms::default(),
            first_word_brand: true,
        }
    }
}

impl ProductParams {
    /// Only the compulsory rules: brand swap for the second string, product
    /// swap (and large delta if numeric) for the third.
    pub fn compulsory_only() -> Self {
        ProductParams {
            p_small_delta: 0.0,
            p_second_edit: 0.0,
            p_antonym: 0.0,
            p_product: 0.0,
            p_third_edit: 0.0,
            ..Default::default()
        }
    }
}

/// A generated triple with notes on fallbacks taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub record: TripleRecord,
    pub notes: Vec<String>,
}

/// Product recipe: the second string swaps the brand (plus optional small
/// delta and light edits); the third keeps the brand, applies a large delta
/// when there is a numeral and any of rules 1, 5, 6, forcing rule 5 when
/// none fired.
pub fn derive_product_triple(s: &str, lex: &ProductLexicons, params: &ProductParams, seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut applied = Vec::new();
    let mut notes = Vec::new();
    let mut push = |target, rule| applied.push(RuleApplication { target, rule });

    let words = rules::split_words(s);
    let mut sj = words.clone();
    match rules::replace_brand(&mut sj, &lex.brands, params.first_word_brand, &mut rng) {
        BrandOutcome::Prepended => notes.push("no brand detected; prepended one".into()),
        BrandOutcome::ReplacedFirstWord | BrandOutcome::Replaced => {}
    }
    push(Target::SecondString, Rule::Brand);
    if rng.gen_bool(params.p_small_delta) && rules::small_delta(&mut sj, &mut rng) {
        push(Target::SecondString, Rule::SmallDelta);
    }
    if rng.gen_bool(params.p_second_edit) {
        let n = count(&mut rng, params.second_edits);
        if rules::char_edits(&mut sj, n, &mut rng) > 0 {
            push(Target::SecondString, Rule::Edit);
        }
    }

    let mut si = words;
    if rules::large_delta(&mut si, &mut rng) {
        push(Target::ThirdString, Rule::LargeDelta);
    }
    let mut extra = false;
    if rng.gen_bool(params.p_antonym) && rules::antonym(&mut si, &params.antonyms, &mut rng) {
        push(Target::ThirdString, Rule::Antonym);
        extra = true;
    }
    if rng.gen_bool(params.p_product) && rules::replace_product(&mut si, &lex.products, &mut rng) {
        push(Target::ThirdString, Rule::Product);
        extra = true;
    }
    if rng.gen_bool(params.p_third_edit) {
        let n = count(&mut rng, params.third_edits);
        if rules::char_edits(&mut si, n, &mut rng) > 0 {
            push(Target::ThirdString, Rule::Edit);
            extra = true;
        }
    }
    if !extra {
        if rules::replace_product(&mut si, &lex.products, &mut rng) {
            push(Target::ThirdString, Rule::Product);
        } else {
            let n = count(&mut rng, params.third_edits);
            rules::char_edits(&mut si, n, &mut rng);
            push(Target::ThirdString, Rule::Edit);
            notes.push("no product noun; used character edits".into());
        }
    }
    Generated {
        record: TripleRecord {
            s: s.to_string(),
            s_j: sj.join(" "),
            s_i: si.join(" "),
            rules: applied,
            seed,
        },
        notes,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceParams {
    pub edits: (usize, usize),
    /// Minimum character edit distance between `s_i` and `s_j`.
    pub min_distance: usize,
    /// Words borrowed from another sentence and attached to `s_i`.
    pub concat_words: (usize, usize),
}

impl Default for SentenceParams {
    fn default() -> Self {
        SentenceParams {
            edits: (2, 4),
            min_distance: 3,
            concat_words: (1, 3),
        }
    }
}

/// Sentence recipe over labeled pairs `(a, b, label)`: for each similar pair,
/// `s = a`, `s_j = b`, and `s_i` is `b` with character edits plus a random
/// fragment of another sentence attached. Dissimilar pairs are ignored.
pub fn derive_sentence_triples(pairs: &[(String, String, PairLabel)], params: &SentenceParams, seed: u64) -> Vec<TripleRecord> {
    let donors: Vec<&str> = pairs.iter().flat_map(|(a, b, _)| [a.as_str(), b.as_str()]).collect();
    let mut out = Vec::new();
    for (i, (a, b, label)) in pairs.iter().enumerate() {
        if *label != PairLabel::Similar {
            continue;
        }
        let item = item_seed(seed, i);
        let mut rng = ChaCha8Rng::seed_from_u64(item);
        let mut si = rules::split_words(b);
        let n = count(&mut rng, params.edits);
        rules::char_edits(&mut si, n, &mut rng);

        let donor = rules::split_words(donors[rng.gen_range(0..donors.len())]);
        if !donor.is_empty() {
            let k = count(&mut rng, params.concat_words).min(donor.len());
            let start = rng.gen_range(0..=donor.len() - k);
            let fragment = donor[start..start + k].to_vec();
            if rng.gen_bool(0.5) {
                si.extend(fragment);
            } else {
                si.splice(0..0, fragment);
            }
        }
        let mut text = si.join(" ");
        let mut guard = 0;
        while strsim::levenshtein(&text, b) < params.min_distance && guard < 64 {
            rules::char_edits(&mut si, 1, &mut rng);
            if si.is_empty() || !si.iter().any(|w| w.chars().any(char::is_alphabetic)) {
                si.push("x".repeat(params.min_distance));
            }
            text = si.join(" ");
            guard += 1;
        }
        out.push(TripleRecord {
            s: a.clone(),
            s_j: b.clone(),
            s_i: text,
            rules: vec![RuleApplication {
                target: Target::ThirdString,
                rule: Rule::Edit,
            }],
            seed: item,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub total: usize,
    /// Triples with `fuzzy(s, s_j) >= fuzzy(s, s_i)`.
    pub satisfied: usize,
    pub violations: Vec<usize>,
}

impl OrderReport {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            return 1.0;
        }
        self.satisfied as f64 / self.total as f64
    }
}

/// Checks the intended ordering with the fuzzy retrieval features (char
/// 2–3 tf-idf cosine, vocabulary fit on every string of the set).
pub fn fuzzy_order_check(triples: &[TripleRecord]) -> Result<OrderReport> {
    let descs: Vec<[Description; 3]> = triples
        .iter()
        .map(|t| {
            [&t.s, &t.s_j, &t.s_i].map(|x| Description::from_text("", x))
        })
        .collect();
    let vocab = Vocabulary::fit(descs.iter().flatten(), NgramConfig::fuzzy())?;
    let mut report = OrderReport {
        total: triples.len(),
        satisfied: 0,
        violations: Vec::new(),
    };
    for (i, [s, sj, si]) in descs.iter().enumerate() {
        let (vs, vj, vi) = (vocab.transform(s), vocab.transform(sj), vocab.transform(si));
        if cosine(&vs, &vj)? >= cosine(&vs, &vi)? {
            report.satisfied += 1;
        } else {
            report.violations.push(i);
        }
    }
    Ok(report)
}
