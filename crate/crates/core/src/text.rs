//! Shared normalization and tokenization.
//!
//! Every component tokenizes through this module so that corpus statistics,
//! model contexts and metric n-grams agree on token boundaries. Text is
//! normalized to NFC and case is preserved; callers that want case folding
//! lowercase explicitly.

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    /// Contains at least one alphabetic character.
    Word,
    Number,
    Punct,
}

/// A token with its character span (Unicode scalar offsets, end exclusive)
/// into the NFC form of the tokenized text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

/// Trims and NFC-normalizes a segment.
pub fn clean_segment(text: &str) -> String {
    normalize(text.trim())
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Tokenizes `text` after NFC normalization, returning spans.
pub fn tokenize_spans(text: &str) -> Vec<Token> {
    let chars: Vec<char> = normalize(text).chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let kind = if word.chars().any(char::is_alphabetic) {
                TokenKind::Word
            } else {
                TokenKind::Number
            };
            tokens.push(Token {
                text: word,
                start,
                end: i,
                kind,
            });
        } else {
            tokens.push(Token {
                text: c.to_string(),
                start: i,
                end: i + 1,
                kind: TokenKind::Punct,
            });
            i += 1;
        }
    }
    tokens
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|t| t.text).collect()
}

pub fn token_count(text: &str) -> usize {
    tokenize_spans(text).len()
}

/// Replaces character spans of `text` (already NFC) with new strings.
/// Spans must be sorted and non-overlapping.
pub(crate) fn replace_spans(text: &str, replacements: &[(usize, usize, &str)]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for &(start, end, with) in replacements {
        out.extend(&chars[cursor..start]);
        out.push_str(with);
        cursor = end;
    }
    out.extend(&chars[cursor..]);
    out
}
