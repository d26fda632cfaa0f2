//! Seeded generator of product-catalog style descriptions.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::recipes::{derive_product_triple, item_seed, ProductLexicons, ProductParams};
use super::TripleRecord;
use crate::{Error, Result};

const BRANDS: &[&str] = &[
    "Sanoxy", "Philips", "Panasonic", "Samsung", "Logitech", "Belkin", "Anker", "Sony", "Bosch",
    "Kenwood", "Prestige", "Havells", "Bajaj", "Dove", "Tresemme", "Nivea", "Colgate", "Lakme",
    "Philco", "Zebronics", "Boat", "Syska", "Wipro", "Usha", "Pigeon", "Milton", "Cello", "Borosil",
    "Kent", "Eureka", "Voltas", "Godrej", "Orient", "Crompton", "Ambrane", "Portronics", "Intex",
    "Lenovo", "Asus", "Dell",
];

const MODIFIERS: &[&str] = &[
    "analog", "digital", "wireless", "wired", "portable", "compact", "smart", "classic", "black",
    "white", "mini", "max", "men", "women", "pro", "ultra", "steel", "plastic", "glass", "cotton",
    "rechargeable", "foldable", "waterproof", "ergonomic", "premium", "deluxe", "indoor", "outdoor",
    "soft", "hard", "light", "dark", "heavy", "slim", "dual", "multi",
];

const MIDDLES: &[&str] = &[
    "audio", "video", "usb", "hdmi", "kitchen", "travel", "office", "bluetooth", "led", "power",
    "hair", "skin", "car", "desk", "wall", "bath",
];

const PRODUCTS: &[&str] = &[
    "adapter", "converter", "charger", "cable", "speaker", "headphones", "earbuds", "mouse",
    "keyboard", "lamp", "kettle", "toaster", "blender", "mixer", "iron", "fan", "heater", "shampoo",
    "conditioner", "lotion", "toothpaste", "bottle", "flask", "tumbler", "backpack", "wallet",
    "watch", "router", "trimmer", "dryer", "cooker", "pan", "knife", "stand", "holder", "mat",
    "bulb", "remote", "tripod", "monitor", "TV", "camera",
];

const QUANTITIES: &[&str] = &[
    "250ml", "500ml", "1l", "2l", "100g", "200g", "1kg", "1.5m", "2m", "3m", "32gb", "64gb", "2 pack",
    "3 pack", "5x200ml", "12z", "750ml", "10w", "20w", "40w", "1200w", "16 inch",
];

/// Vocabulary for [`generate_products`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductVocabulary {
    pub brands: Vec<String>,
    pub modifiers: Vec<String>,
    pub middles: Vec<String>,
    pub products: Vec<String>,
    pub quantities: Vec<String>,
}

fn owned(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for ProductVocabulary {
    fn default() -> Self {
        ProductVocabulary {
            brands: owned(BRANDS),
            modifiers: owned(MODIFIERS),
            middles: owned(MIDDLES),
            products: owned(PRODUCTS),
            quantities: owned(QUANTITIES),
        }
    }
}

impl ProductVocabulary {
    pub fn lexicons(&self) -> Result<ProductLexicons> {
        ProductLexicons::new(self.brands.clone(), self.products.clone())
    }

    fn describe<R: Rng>(&self, rng: &mut R) -> String {
        let mut words = vec![self.brands.choose(rng).unwrap().clone()];
        let n_mod = rng.gen_range(1..=2);
        for m in self.modifiers.choose_multiple(rng, n_mod) {
            words.push(m.clone());
        }
        if rng.gen_bool(0.6) {
            words.push(self.middles.choose(rng).unwrap().clone());
        }
        words.push(self.products.choose(rng).unwrap().clone());
        if rng.gen_bool(0.6) {
            words.push(self.quantities.choose(rng).unwrap().clone());
        }
        words.join(" ")
    }
}

/// `n` distinct descriptions of the form
/// `brand modifier{1,2} [middle] product [quantity]`.
pub fn generate_products(n: usize, vocab: &ProductVocabulary, seed: u64) -> Result<Vec<String>> {
    if vocab.brands.is_empty() || vocab.modifiers.is_empty() || vocab.middles.is_empty() || vocab.products.is_empty() || vocab.quantities.is_empty() {
        return Err(Error::InvalidParameter("every vocabulary list must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 100 * n + 1000 {
            return Err(Error::InvalidParameter(format!("vocabulary too small for {n} distinct items")));
        }
        let d = vocab.describe(&mut rng);
        if seen.insert(d.to_lowercase()) {
            out.push(d);
        }
    }
    Ok(out)
}

/// One product-recipe triple per description, seeded per item.
pub fn product_triples(items: &[String], lex: &ProductLexicons, params: &ProductParams, seed: u64) -> Vec<TripleRecord> {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| derive_product_triple(s, lex, params, item_seed(seed, i)).record)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_and_reproducible() {
        let v = ProductVocabulary::default();
        let a = generate_products(500, &v, 4).unwrap();
        assert_eq!(a, generate_products(500, &v, 4).unwrap());
        let set: HashSet<String> = a.iter().map(|s| s.to_lowercase()).collect();
        assert_eq!(set.len(), 500);
        assert_ne!(a, generate_products(500, &v, 5).unwrap());
    }

    #[test]
    fn tiny_vocabulary_is_rejected() {
        let v = ProductVocabulary {
            brands: vec!["a".into()],
            modifiers: vec!["b".into()],
            middles: vec!["c".into()],
            products: vec!["d".into()],
            quantities: vec!["1l".into()],
        };
        assert!(generate_products(100, &v, 1).is_err());
    }
}
