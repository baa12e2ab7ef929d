use std::fmt;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// A symbol of a finite alphabet, `0 <= id < |A|`.
pub type Symbol = u8;

/// A finite word `a_1 .. a_n` (n >= 1) together with its prefix function.
///
/// The prefix function is built eagerly because every scanner needs it; the
/// minimal internal period is derived from it on first request.
#[derive(Clone)]
pub struct Pattern {
    word: Vec<Symbol>,
    prefix: Vec<usize>,
    min_period: OnceLock<usize>,
}

impl Pattern {
    pub fn new(word: Vec<Symbol>) -> Result<Pattern> {
        if word.is_empty() {
            return invalid("pattern must have length >= 1");
        }
        let prefix = prefix_function(&word);
        Ok(Pattern {
            word,
            prefix,
            min_period: OnceLock::new(),
        })
    }

    /// Parse a word written with decimal digits, e.g. `"0110"`.
    pub fn from_digits(text: &str) -> Result<Pattern> {
        Pattern::new(parse_digits(text)?)
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.word
    }

    /// `prefix[i]` is the length of the longest proper border of `a_1 .. a_{i+1}`.
    pub fn prefix_function(&self) -> &[usize] {
        &self.prefix
    }

    /// Smallest shift `k >= 1` with `a_{i+k} = a_i` on the whole overlap;
    /// `n` when the word has no proper self-overlap.
    pub fn min_period(&self) -> usize {
        *self
            .min_period
            .get_or_init(|| self.word.len() - self.prefix[self.word.len() - 1])
    }

    /// Largest symbol id appearing in the word.
    pub fn max_symbol(&self) -> Symbol {
        self.word.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({})", format_digits(&self.word))
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.word == other.word
    }
}

impl Eq for Pattern {}

fn prefix_function(word: &[Symbol]) -> Vec<usize> {
    let mut prefix = vec![0usize; word.len()];
    let mut k = 0;
    for i in 1..word.len() {
        while k > 0 && word[k] != word[i] {
            k = prefix[k - 1];
        }
        if word[k] == word[i] {
            k += 1;
        }
        prefix[i] = k;
    }
    prefix
}

/// Minimal internal period of `pattern`.
pub fn min_period(pattern: &Pattern) -> usize {
    pattern.min_period()
}

/// Parse `'0'..='9'` characters into symbols.
pub fn parse_digits(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) => Ok(d as Symbol),
            None => invalid(format!("'{c}' is not a decimal symbol")),
        })
        .collect()
}

/// Render symbols as decimal digits (alphabets up to 10 symbols).
pub fn format_digits(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(|&s| char::from_digit(s as u32, 36).unwrap_or('?'))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters(s: &str) -> Pattern {
        Pattern::new(s.bytes().map(|b| b - b'a').collect()).unwrap()
    }

    #[test]
    fn min_period_examples() {
        assert_eq!(letters("aaa").min_period(), 1);
        assert_eq!(letters("aba").min_period(), 2);
        assert_eq!(letters("abc").min_period(), 3);
        assert_eq!(letters("abaab").min_period(), 3);
        assert_eq!(letters("a").min_period(), 1);
    }

    #[test]
    fn empty_pattern_is_rejected() {
        assert!(Pattern::new(vec![]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let p = Pattern::from_digits("0110").unwrap();
        assert_eq!(p.symbols(), &[0, 1, 1, 0]);
        assert_eq!(format_digits(p.symbols()), "0110");
        assert!(Pattern::from_digits("01x").is_err());
    }
}
