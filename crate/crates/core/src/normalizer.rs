//! Timex string to TimeML value: tokenize, parse, rank, evaluate, serialize.

use thiserror::Error;

use crate::eval::{EvalError, Evaluator};
use crate::grammar::Grammar;
use crate::parser::{parse, rank_parses_with, tokenize, ParseFailure, SyncParse};
use crate::timex::{Anchor, TimexType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub value: String,
    pub kind: TimexType,
    /// The chosen parse.
    pub parse: SyncParse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Parse(#[from] ParseFailure),
    #[error("evaluation failed: {0}")]
    Evaluation(#[from] EvalError),
}

impl NormalizeError {
    pub fn is_parse_failure(&self) -> bool {
        matches!(self, NormalizeError::Parse(_))
    }
}

/// A grammar paired with an evaluator configured from its header.
#[derive(Debug, Clone)]
pub struct Normalizer {
    pub grammar: Grammar,
    pub evaluator: Evaluator,
}

impl Normalizer {
    pub fn new(grammar: Grammar) -> Self {
        let evaluator = Evaluator::new(grammar.config.part_of_day);
        Normalizer { grammar, evaluator }
    }

    pub fn normalize(&self, text: &str, anchor: Anchor) -> Result<Normalized, NormalizeError> {
        let tokens = tokenize(text);
        let parses = parse(&tokens, &self.grammar)?;
        let best = rank_parses_with(parses, anchor, &self.evaluator)
            .into_iter()
            .next()
            .expect("parse returns at least one tree pair");
        let obj = self.evaluator.evaluate(&best.target, anchor)?;
        Ok(Normalized {
            value: self.evaluator.to_timeml(&obj),
            kind: Evaluator::timex_type(&obj),
            parse: best,
        })
    }
}

/// One-shot normalization with a borrowed grammar.
pub fn normalize(text: &str, anchor: Anchor, grammar: &Grammar) -> Result<(String, TimexType), NormalizeError> {
    let evaluator = Evaluator::new(grammar.config.part_of_day);
    let parses = parse(&tokenize(text), grammar)?;
    let best = &rank_parses_with(parses, anchor, &evaluator)[0];
    let obj = evaluator.evaluate(&best.target, anchor)?;
    Ok((evaluator.to_timeml(&obj), Evaluator::timex_type(&obj)))
}
