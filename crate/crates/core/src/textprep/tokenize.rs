use std::ops::Range;

/// A lowercased token and the character range it came from in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '.' | '%' | '&' | '+' | '\'')
}

fn is_trimmed(c: char) -> bool {
    matches!(c, '.' | '&' | '+' | '\'')
}

/// Splits `text` into lowercase tokens.
///
/// A token is a maximal run of alphanumerics and `. % & + '`, with `. & + '`
/// stripped from both ends. Spans are character (not byte) offsets.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_token_char(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && is_token_char(chars[i]) {
            i += 1;
        }
        let (mut lo, mut hi) = (start, i);
        while lo < hi && is_trimmed(chars[lo]) {
            lo += 1;
        }
        while hi > lo && is_trimmed(chars[hi - 1]) {
            hi -= 1;
        }
        if lo == hi {
            continue;
        }
        let lowered: String = chars[lo..hi]
            .iter()
            .flat_map(|c| c.to_lowercase())
            .filter(|&c| is_token_char(c))
            .collect();
        let lowered = lowered.trim_matches(is_trimmed);
        if !lowered.is_empty() {
            out.push(Token {
                text: lowered.to_string(),
                span: lo..hi,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_on_punctuation_and_keeps_decimals() {
        assert_eq!(
            texts("5x200ml Fruit Juice 100% - Tropicana, Apple"),
            ["5x200ml", "fruit", "juice", "100%", "tropicana", "apple"]
        );
        assert_eq!(texts("TRES 0.739L CD"), ["tres", "0.739l", "cd"]);
        assert_eq!(texts("end. 'quoted'"), ["end", "quoted"]);
    }

    #[test]
    fn spans_are_char_offsets() {
        let toks = tokenize("é Ab");
        assert_eq!(toks[1].span, 2..4);
        assert_eq!(toks[1].text, "ab");
    }

    #[test]
    fn pure_punctuation_yields_nothing() {
        assert!(tokenize(" - , ... ").is_empty());
    }
}
