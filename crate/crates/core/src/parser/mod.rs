//! Tokenization and CYK+ parsing of timex strings into synchronized trees.

mod chart;
mod rank;
mod tree;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use chart::{parse, ParseFailure};
pub use rank::{rank_parses, rank_parses_with, RANK_EVALUATION_LIMIT};
pub use tree::{SourceNode, SourceTree, SyncParse, TargetNode, TargetTree};

/// A token of a timex string. `char_span` is a byte range into the text it
/// was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub char_span: Range<usize>,
    pub numeric_value: Option<i64>,
}

impl Token {
    pub fn new(text: impl Into<String>, char_span: Range<usize>) -> Self {
        let text = text.into();
        let numeric_value = if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
            text.parse().ok()
        } else {
            None
        };
        Token {
            text,
            char_span,
            numeric_value,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Space,
    Punct,
    Digit,
    Letter,
}

fn is_combining_mark(c: char) -> bool {
    matches!(c, '\u{0300}'..='\u{036F}' | '\u{1AB0}'..='\u{1AFF}' | '\u{1DC0}'..='\u{1DFF}' | '\u{20D0}'..='\u{20FF}' | '\u{FE20}'..='\u{FE2F}')
}

fn classify(c: char) -> CharClass {
    if c.is_whitespace() {
        CharClass::Space
    } else if c.is_ascii_digit() {
        CharClass::Digit
    } else if c.is_alphanumeric() || is_combining_mark(c) {
        CharClass::Letter
    } else {
        CharClass::Punct
    }
}

/// Splits on whitespace, gives every punctuation character its own token
/// and separates digit runs from letter runs. Case is preserved.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, CharClass)> = None;
    let flush = |tokens: &mut Vec<Token>, from: usize, to: usize| {
        if from < to {
            tokens.push(Token::new(&text[from..to], from..to));
        }
    };
    for (i, c) in text.char_indices() {
        let class = classify(c);
        if let Some((s, prev)) = start {
            if class != prev || prev == CharClass::Punct {
                flush(&mut tokens, s, i);
                start = None;
            }
        }
        if class == CharClass::Space {
            continue;
        }
        if start.is_none() {
            start = Some((i, class));
        }
    }
    if let Some((s, _)) = start {
        flush(&mut tokens, s, text.len());
    }
    tokens
}
