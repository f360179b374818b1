//! Grammars and detector lexicons shipped with the crate.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::detection::Lexicon;
use crate::grammar::Grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Language {
    En,
    Es,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported language `{0}` (expected en or es)")]
pub struct UnknownLanguage(pub String);

impl Language {
    pub const ALL: [Language; 2] = [Language::En, Language::Es];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Es => "es",
        }
    }

    pub fn grammar_text(self) -> &'static str {
        match self {
            Language::En => include_str!("../data/grammar.en.scfg"),
            Language::Es => include_str!("../data/grammar.es.scfg"),
        }
    }

    pub fn lexicon_text(self) -> &'static str {
        match self {
            Language::En => include_str!("../data/lexicon.en.tsv"),
            Language::Es => include_str!("../data/lexicon.es.tsv"),
        }
    }

    pub fn grammar(self) -> Grammar {
        Grammar::parse_named(&format!("bundled-{}", self.code()), self.grammar_text())
            .expect("bundled grammar loads")
    }

    pub fn lexicon(self) -> Lexicon {
        Lexicon::parse(self.lexicon_text()).expect("bundled lexicon loads")
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "es" => Ok(Language::Es),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}
