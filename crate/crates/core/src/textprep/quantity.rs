use std::ops::Range;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::tokenize::Token;

/// Canonical base units. Volumes reduce to milliliters, masses to grams,
/// lengths to millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Milliliter,
    Gram,
    Millimeter,
    Percent,
    Count,
}

impl Unit {
    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Milliliter => "ml",
            Unit::Gram => "g",
            Unit::Millimeter => "mm",
            Unit::Percent => "%",
            Unit::Count => "ct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantity {
    pub magnitude: Decimal,
    pub unit: Unit,
    /// Character range in the original text.
    pub raw_span: Range<usize>,
}

impl Quantity {
    /// Renders the canonical form, e.g. `739ml`. Parsing it again yields the
    /// same magnitude and unit.
    pub fn canonical_text(&self) -> String {
        format!("{}{}", self.magnitude, self.unit.symbol())
    }
}

fn dec(s: &str) -> Decimal {
    Decimal::from_str(s).expect("unit factor literal")
}

/// Looks up a unit word, returning its base unit and the factor to it.
pub fn unit_factor(word: &str) -> Option<(Unit, Decimal)> {
    let (unit, factor) = match word {
        "ml" | "mls" | "milliliter" | "milliliters" | "millilitre" | "millilitres" => {
            (Unit::Milliliter, "1")
        }
        "cl" => (Unit::Milliliter, "10"),
        "dl" => (Unit::Milliliter, "100"),
        "l" | "lt" | "ltr" | "ltrs" | "liter" | "liters" | "litre" | "litres" => {
            (Unit::Milliliter, "1000")
        }
        "oz" | "z" | "floz" => (Unit::Milliliter, "29.5735"),
        "g" | "gm" | "gms" | "gr" | "grm" | "gram" | "grams" => (Unit::Gram, "1"),
        "mg" => (Unit::Gram, "0.001"),
        "kg" | "kgs" => (Unit::Gram, "1000"),
        "lb" | "lbs" => (Unit::Gram, "453.59237"),
        "mm" => (Unit::Millimeter, "1"),
        "cm" => (Unit::Millimeter, "10"),
        "m" => (Unit::Millimeter, "1000"),
        "inch" | "inches" => (Unit::Millimeter, "25.4"),
        "%" => (Unit::Percent, "1"),
        "x" | "ct" | "count" | "pc" | "pcs" | "piece" | "pieces" | "box" | "boxes" | "pack"
        | "packs" | "pk" | "nos" | "units" => (Unit::Count, "1"),
        _ => return None,
    };
    Some((unit, dec(factor)))
}

/// True if `word` is a recognized unit.
pub fn is_unit_word(word: &str) -> bool {
    unit_factor(word).is_some()
}

/// Converts `value` given in `unit_word` to its canonical base unit.
pub fn canonicalize(value: Decimal, unit_word: &str) -> Option<(Decimal, Unit)> {
    let (unit, factor) = unit_factor(unit_word)?;
    let magnitude = value.checked_mul(factor)?.normalize();
    (magnitude > Decimal::ZERO).then_some((magnitude, unit))
}

static ATTACHED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d+(?:\.\d+)?|\.\d+)([a-z%]+)?$").unwrap());
static MULTIPACK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d+)x(\d+(?:\.\d+)?)([a-z]+)$").unwrap());

/// Finds number+unit patterns, attached (`739ml`, `5x200ml`) or
/// space-separated (`5 lt`). Anything unparseable is left alone.
pub fn extract(tokens: &[Token]) -> Vec<Quantity> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        if let Some(caps) = MULTIPACK.captures(&tok.text) {
            let count = Decimal::from_str(&caps[1]).ok();
            let each = Decimal::from_str(&caps[2]).ok();
            if let (Some(count), Some(each)) = (count, each) {
                if let Some((m, unit)) = canonicalize(each, &caps[3]) {
                    if let Some((c, _)) = canonicalize(count, "x") {
                        out.push(Quantity {
                            magnitude: c,
                            unit: Unit::Count,
                            raw_span: tok.span.clone(),
                        });
                    }
                    out.push(Quantity {
                        magnitude: m,
                        unit,
                        raw_span: tok.span.clone(),
                    });
                }
            }
            i += 1;
            continue;
        }
        if let Some(caps) = ATTACHED.captures(&tok.text) {
            let Ok(value) = Decimal::from_str(&caps[1]) else {
                i += 1;
                continue;
            };
            match caps.get(2) {
                Some(unit) => {
                    if let Some((m, unit)) = canonicalize(value, unit.as_str()) {
                        out.push(Quantity {
                            magnitude: m,
                            unit,
                            raw_span: tok.span.clone(),
                        });
                    }
                }
                None => {
                    if let Some(next) = tokens.get(i + 1) {
                        if let Some((m, unit)) = canonicalize(value, &next.text) {
                            out.push(Quantity {
                                magnitude: m,
                                unit,
                                raw_span: tok.span.start..next.span.end,
                            });
                            i += 2;
                            continue;
                        }
                    }
                }
            }
        }
        i += 1;
    }
    out
}
