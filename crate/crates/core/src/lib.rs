//! Grammar-based normalization of temporal expressions to TimeML values,
//! with BIO-tagged corpus handling and TempEval-style scoring.

pub mod bundled;
pub mod corpus;
pub mod detection;
pub mod eval;
pub mod evaluator;
pub mod grammar;
pub mod normalizer;
pub mod parser;
pub mod pipeline;
pub mod timex;
pub mod value;

pub use bundled::Language;
pub use eval::{Evaluator, TemporalObject};
pub use grammar::{load_grammar, validate_grammar, Grammar};
pub use evaluator::{evaluate_tabulated, match_timexes, score, Metrics, Report};
pub use normalizer::{normalize, NormalizeError, Normalized, Normalizer};
pub use pipeline::{Mode, Pipeline, PipelineConfig};
pub use parser::{parse, rank_parses, tokenize, ParseFailure, SyncParse, Token};
pub use timex::{Anchor, Timex, TimexType};
pub use value::{canonicalize_value, classify_value, values_equivalent, TimeMLValue};
