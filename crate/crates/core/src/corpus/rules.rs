//! The six string-rewriting rules used to derive preference triples.
//!
//! All rules act on whitespace-separated words and draw randomness only from
//! the generator passed in.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::textprep::quantity::is_unit_word;
use crate::textprep::StopWords;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Rule {
    /// Swap a word for its antonym (men/women).
    Antonym,
    /// Perturb one numeral by at most 10%, at least one unit.
    SmallDelta,
    /// Perturb one numeral by at least 50%.
    LargeDelta,
    /// Replace the brand.
    Brand,
    /// Replace the product noun.
    Product,
    /// Random character insertions, deletions and substitutions.
    Edit,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::Antonym,
        Rule::SmallDelta,
        Rule::LargeDelta,
        Rule::Brand,
        Rule::Product,
        Rule::Edit,
    ];

    pub fn id(self) -> u8 {
        Rule::ALL.iter().position(|&r| r == self).unwrap() as u8 + 1
    }

    pub fn from_id(id: u8) -> Option<Rule> {
        Rule::ALL.get((id as usize).checked_sub(1)?).copied()
    }
}

impl From<Rule> for u8 {
    fn from(r: Rule) -> u8 {
        r.id()
    }
}

impl TryFrom<u8> for Rule {
    type Error = String;

    fn try_from(id: u8) -> std::result::Result<Rule, String> {
        Rule::from_id(id).ok_or_else(|| format!("rule id must be 1-6, got {id}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "s_j")]
    SecondString,
    #[serde(rename = "s_i")]
    ThirdString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleApplication {
    pub target: Target,
    pub rule: Rule,
}

const DEFAULT_ANTONYMS: &[(&str, &str)] = &[
    ("men", "women"),
    ("man", "woman"),
    ("boys", "girls"),
    ("black", "white"),
    ("analog", "digital"),
    ("small", "large"),
    ("mini", "max"),
    ("wired", "wireless"),
    ("hot", "cold"),
    ("light", "dark"),
    ("indoor", "outdoor"),
    ("left", "right"),
    ("old", "new"),
    ("with", "without"),
    ("front", "rear"),
    ("male", "female"),
    ("dry", "wet"),
    ("soft", "hard"),
];

/// Symmetric antonym table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antonyms(BTreeMap<String, String>);

impl Default for Antonyms {
    fn default() -> Self {
        let mut a = Antonyms(BTreeMap::new());
        for (x, y) in DEFAULT_ANTONYMS {
            a.insert(x, y);
        }
        a
    }
}

impl Antonyms {
    pub fn insert(&mut self, a: &str, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        self.0.insert(a.clone(), b.clone());
        self.0.insert(b, a);
    }

    /// Adds pairs from a file of `word antonym` lines (comma or whitespace).
    pub fn load(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|p| !p.is_empty())
                .collect();
            match parts.as_slice() {
                [a, b] => self.insert(a, b),
                _ => return Err(Error::Malformed(format!("{}:{}: expected two words", path.display(), i + 1))),
            }
        }
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.0.get(&word.to_lowercase()).map(String::as_str)
    }
}

/// Copies the capitalization style of `template` onto `word`.
pub fn match_case(template: &str, word: &str) -> String {
    let letters: Vec<char> = template.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return word.to_uppercase();
    }
    match letters.first() {
        Some(c) if c.is_uppercase() => {
            let mut cs = word.chars();
            cs.next()
                .map(|f| f.to_uppercase().chain(cs).collect())
                .unwrap_or_default()
        }
        _ => word.to_string(),
    }
}

static NUMERAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?").unwrap());

/// A numeral inside a word, as an integer count of its last decimal place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numeral {
    pub word: usize,
    pub start: usize,
    pub end: usize,
    pub units: u64,
    pub scale: usize,
}

impl Numeral {
    pub fn format(&self, units: u64) -> String {
        if self.scale == 0 {
            return units.to_string();
        }
        let digits = format!("{:0width$}", units, width = self.scale + 1);
        let (int, frac) = digits.split_at(digits.len() - self.scale);
        format!("{int}.{frac}")
    }
}

/// The first numeral of every word that has one.
pub fn numerals(words: &[String]) -> Vec<Numeral> {
    words
        .iter()
        .enumerate()
        .filter_map(|(i, w)| {
            let m = NUMERAL.find(w)?;
            let digits: String = m.as_str().chars().filter(char::is_ascii_digit).collect();
            if digits.len() > 15 {
                return None;
            }
            Some(Numeral {
                word: i,
                start: m.start(),
                end: m.end(),
                units: digits.parse().ok()?,
                scale: m.as_str().split('.').nth(1).map_or(0, str::len),
            })
        })
        .collect()
}

fn rewrite(words: &mut [String], n: &Numeral, units: u64) {
    let w = &words[n.word];
    words[n.word] = format!("{}{}{}", &w[..n.start], n.format(units), &w[n.end..]);
}

/// Rule 2. Returns false when there is no numeral.
pub fn small_delta<R: Rng>(words: &mut [String], rng: &mut R) -> bool {
    let Some(n) = numerals(words).choose(rng).cloned() else {
        return false;
    };
    let delta = rng.gen_range(1..=(n.units / 10).max(1));
    let units = if n.units > delta && rng.gen_bool(0.5) {
        n.units - delta
    } else {
        n.units + delta
    };
    rewrite(words, &n, units);
    true
}

/// Rule 3. Returns false when there is no numeral.
pub fn large_delta<R: Rng>(words: &mut [String], rng: &mut R) -> bool {
    let Some(n) = numerals(words).choose(rng).cloned() else {
        return false;
    };
    let half = n.units.div_ceil(2).max(1);
    let units = if n.units >= 2 && rng.gen_bool(0.5) {
        n.units - rng.gen_range(half..n.units.max(half + 1))
    } else {
        n.units + rng.gen_range(half..=(2 * n.units).max(half))
    };
    rewrite(words, &n, units.max(1));
    true
}

/// Rule 1 on a random word that has an antonym.
pub fn antonym<R: Rng>(words: &mut [String], table: &Antonyms, rng: &mut R) -> bool {
    let hits: Vec<usize> = (0..words.len()).filter(|&i| table.get(&words[i]).is_some()).collect();
    let Some(&i) = hits.choose(rng) else {
        return false;
    };
    let replacement = table.get(&words[i]).unwrap().to_string();
    words[i] = match_case(&words[i], &replacement);
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrandOutcome {
    /// A lexicon brand was swapped for another.
    Replaced,
    /// No lexicon brand; the first word was taken as the brand and swapped.
    ReplacedFirstWord,
    /// No brand found; a random brand was prepended.
    Prepended,
}

fn is_plain_word(w: &str, stopwords: &StopWords) -> bool {
    w.chars().all(char::is_alphabetic) && !w.is_empty() && !stopwords.contains(&w.to_lowercase())
}

fn other<'a, R: Rng>(choices: &'a [String], current: &str, rng: &mut R) -> Option<&'a String> {
    let pool: Vec<&String> = choices.iter().filter(|c| !c.eq_ignore_ascii_case(current)).collect();
    pool.choose(rng).copied()
}

/// Rule 4. `brands` must not be empty.
pub fn replace_brand<R: Rng>(
    words: &mut Vec<String>,
    brands: &[String],
    first_word_heuristic: bool,
    rng: &mut R,
) -> BrandOutcome {
    let stop = StopWords::default();
    let known = words.iter().position(|w| brands.iter().any(|b| b.eq_ignore_ascii_case(w)));
    let (pos, outcome) = match known {
        Some(p) => (Some(p), BrandOutcome::Replaced),
        None if first_word_heuristic && words.first().is_some_and(|w| is_plain_word(w, &stop)) => {
            (Some(0), BrandOutcome::ReplacedFirstWord)
        }
        None => (None, BrandOutcome::Prepended),
    };
    match pos {
        Some(p) => match other(brands, &words[p], rng) {
            Some(b) => words[p] = b.clone(),
            None => return BrandOutcome::Prepended,
        },
        None => {
            let b = brands.choose(rng).expect("brand lexicon is not empty");
            words.insert(0, b.clone());
        }
    }
    outcome
}

/// Position of the product noun: the last alphabetic word that is neither
/// a stopword nor a unit.
pub fn product_position(words: &[String]) -> Option<usize> {
    let stop = StopWords::default();
    words
        .iter()
        .rposition(|w| is_plain_word(w, &stop) && !is_unit_word(&w.to_lowercase()))
}

/// Rule 5.
pub fn replace_product<R: Rng>(words: &mut [String], products: &[String], rng: &mut R) -> bool {
    let Some(p) = product_position(words) else {
        return false;
    };
    match other(products, &words[p], rng) {
        Some(x) => {
            words[p] = x.clone();
            true
        }
        None => false,
    }
}

/// Rule 6: `n` random character edits on letters of random words. Digits
/// are never deleted or substituted. Returns the number of edits made.
pub fn char_edits<R: Rng>(words: &mut [String], n: usize, rng: &mut R) -> usize {
    let mut done = 0;
    for _ in 0..n {
        let candidates: Vec<usize> = (0..words.len())
            .filter(|&i| words[i].chars().any(char::is_alphabetic))
            .collect();
        let Some(&w) = candidates.choose(rng) else {
            break;
        };
        let mut chars: Vec<char> = words[w].chars().collect();
        let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
        let letter = (b'a' + rng.gen_range(0..26u8)) as char;
        match rng.gen_range(0..3) {
            0 => {
                let at = rng.gen_range(0..=chars.len());
                chars.insert(at, letter);
            }
            1 if chars.len() > 1 => {
                chars.remove(*letters.choose(rng).unwrap());
            }
            _ => {
                let at = *letters.choose(rng).unwrap();
                chars[at] = if chars[at].to_ascii_lowercase() == letter {
                    (b'a' + (letter as u8 - b'a' + 1) % 26) as char
                } else {
                    letter
                };
            }
        }
        words[w] = chars.into_iter().collect();
        done += 1;
    }
    done
}

/// Swaps one random adjacent pair of words.
pub fn swap_adjacent<R: Rng>(words: &mut [String], rng: &mut R) -> bool {
    if words.len() < 2 {
        return false;
    }
    let i = rng.gen_range(0..words.len() - 1);
    words.swap(i, i + 1);
    true
}

pub fn split_words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn rule_ids() {
        for (i, r) in Rule::ALL.iter().enumerate() {
            assert_eq!(r.id() as usize, i + 1);
            assert_eq!(Rule::from_id(r.id()), Some(*r));
        }
        assert_eq!(Rule::from_id(0), None);
        assert_eq!(serde_json::to_string(&Rule::Brand).unwrap(), "4");
        assert!(serde_json::from_str::<Rule>("7").is_err());
    }

    #[test]
    fn numeral_parsing() {
        let w = split_words("TRES 0.739L 12z 2in1");
        let n = numerals(&w);
        assert_eq!(n.len(), 3);
        assert_eq!((n[0].units, n[0].scale), (739, 3));
        assert_eq!(n[0].format(740), "0.740");
        assert_eq!(n[0].format(1739), "1.739");
        assert_eq!(n[1].units, 12);
    }

    #[test]
    fn small_delta_bounds() {
        let mut r = rng();
        for _ in 0..200 {
            let mut w = split_words("Dove 12z");
            assert!(small_delta(&mut w, &mut r));
            let v: u64 = w[1].trim_end_matches('z').parse().unwrap();
            assert!(v == 11 || v == 13, "{v}");
            let mut w = split_words("pack 500ml");
            small_delta(&mut w, &mut r);
            let v: i64 = w[1].trim_end_matches("ml").parse().unwrap();
            assert!((v - 500).abs() >= 1 && (v - 500).abs() <= 50);
        }
        assert!(!small_delta(&mut split_words("no digits"), &mut r));
    }

    #[test]
    fn large_delta_bounds() {
        let mut r = rng();
        for _ in 0..200 {
            let mut w = split_words("500ml");
            assert!(large_delta(&mut w, &mut r));
            let v: i64 = w[0].trim_end_matches("ml").parse().unwrap();
            assert!((v - 500).abs() >= 250, "{v}");
            assert!(v >= 1);
        }
    }

    #[test]
    fn antonyms_keep_case() {
        let mut r = rng();
        let mut w = split_words("Dove Men US");
        assert!(antonym(&mut w, &Antonyms::default(), &mut r));
        assert_eq!(w, ["Dove", "Women", "US"]);
        assert_eq!(match_case("USB", "cable"), "CABLE");
        assert!(!antonym(&mut split_words("plain soap"), &Antonyms::default(), &mut r));
    }

    #[test]
    fn brand_and_product() {
        let mut r = rng();
        let brands = vec!["Philips".to_string()];
        let mut w = split_words("sanoxy analog to digital audio converter adapter");
        assert_eq!(replace_brand(&mut w, &brands, true, &mut r), BrandOutcome::ReplacedFirstWord);
        assert_eq!(w.join(" "), "Philips analog to digital audio converter adapter");
        let mut w = split_words("sanoxy analog to digital audio converter adapter");
        assert!(replace_product(&mut w, &["TV".to_string()], &mut r));
        assert_eq!(w.join(" "), "sanoxy analog to digital audio converter TV");
        let mut w = split_words("5 lt");
        assert_eq!(replace_brand(&mut w, &brands, true, &mut r), BrandOutcome::Prepended);
        assert_eq!(w[0], "Philips");
        assert_eq!(product_position(&split_words("oil 5 lt")), Some(0));
    }

    #[test]
    fn edits_spare_digits() {
        let mut r = rng();
        for _ in 0..100 {
            let mut w = split_words("ab 123 c4");
            assert_eq!(char_edits(&mut w, 3, &mut r), 3);
            let digits: String = w.concat().chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits, "1234");
        }
    }
}
