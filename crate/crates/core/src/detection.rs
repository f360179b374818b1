//! BIO tags, span decoding and the pattern-based baseline detector.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalizer::Normalizer;
use crate::parser::Token;
use crate::timex::{Anchor, Timex, TimexType, UnknownTimexType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BioTag {
    O,
    B(TimexType),
    I(TimexType),
}

impl BioTag {
    pub fn kind(self) -> Option<TimexType> {
        match self {
            BioTag::O => None,
            BioTag::B(t) | BioTag::I(t) => Some(t),
        }
    }

    /// Whether `self` may follow `prev` (`None` at the start of a sequence).
    pub fn may_follow(self, prev: Option<BioTag>) -> bool {
        match self {
            BioTag::I(t) => matches!(prev, Some(BioTag::B(p) | BioTag::I(p)) if p == t),
            _ => true,
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(t) => write!(f, "B-{t}"),
            BioTag::I(t) => write!(f, "I-{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BioTagError {
    #[error("malformed tag `{0}`")]
    Malformed(String),
    #[error(transparent)]
    Type(#[from] UnknownTimexType),
}

impl FromStr for BioTag {
    type Err = BioTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioTag::O);
        }
        match s.split_once('-') {
            Some(("B", t)) => Ok(BioTag::B(t.parse()?)),
            Some(("I", t)) => Ok(BioTag::I(t.parse()?)),
            _ => Err(BioTagError::Malformed(s.to_string())),
        }
    }
}

/// Position of the first tag that may not follow its predecessor.
pub fn first_invalid(tags: &[BioTag]) -> Option<usize> {
    let mut prev = None;
    for (i, t) in tags.iter().enumerate() {
        if !t.may_follow(prev) {
            return Some(i);
        }
        prev = Some(*t);
    }
    None
}

/// Maximal runs of a B tag followed by I tags of the same type. An orphan
/// I tag, or one switching type, starts a new run and counts as a repair.
pub fn decode_tag_spans(tags: &[BioTag]) -> (Vec<(Range<usize>, TimexType)>, usize) {
    let mut spans: Vec<(Range<usize>, TimexType)> = Vec::new();
    let mut repairs = 0;
    let mut open: Option<(usize, TimexType)> = None;
    for (i, tag) in tags.iter().enumerate() {
        let continues = matches!((tag, open), (BioTag::I(t), Some((_, o))) if *t == o);
        if continues {
            continue;
        }
        if let Some((s, t)) = open.take() {
            spans.push((s..i, t));
        }
        match tag {
            BioTag::O => {}
            BioTag::B(t) => open = Some((i, *t)),
            BioTag::I(t) => {
                repairs += 1;
                open = Some((i, *t));
            }
        }
    }
    if let Some((s, t)) = open {
        spans.push((s..tags.len(), t));
    }
    (spans, repairs)
}

/// Tags `n` tokens from non-overlapping spans.
pub fn encode_spans(n: usize, spans: &[(Range<usize>, TimexType)]) -> Vec<BioTag> {
    let mut tags = vec![BioTag::O; n];
    for (r, t) in spans {
        for i in r.clone() {
            tags[i] = if i == r.start { BioTag::B(*t) } else { BioTag::I(*t) };
        }
    }
    tags
}

/// Decodes tags over document tokens into timexes without values. Returns
/// the timexes and the number of repaired tags.
pub fn decode_spans(doc_id: &str, tags: &[BioTag], tokens: &[Token], text: &str) -> (Vec<Timex>, usize) {
    let (spans, repairs) = decode_tag_spans(tags);
    let timexes = spans
        .into_iter()
        .map(|(r, kind)| {
            let chars = tokens[r.start].char_span.start..tokens[r.end - 1].char_span.end;
            Timex::new(doc_id, r, chars.clone(), &text[chars], kind).expect("decoded spans are non-empty")
        })
        .collect();
    (timexes, repairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Element {
    /// Lowercased alternatives.
    Literal(Vec<String>),
    Num,
    Num4,
    /// A number from 1 to 31.
    Ord,
}

impl Element {
    fn matches(&self, token: &str) -> bool {
        let numeric = !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit());
        match self {
            Element::Literal(alts) => {
                let lower = token.to_lowercase();
                alts.contains(&lower)
            }
            Element::Num => numeric,
            Element::Num4 => numeric && token.len() == 4,
            Element::Ord => numeric && token.parse::<u32>().is_ok_and(|n| (1..=31).contains(&n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Pattern {
    elements: Vec<Element>,
    kind: TimexType,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lexicon line {line}: {reason}")]
pub struct LexiconError {
    pub line: usize,
    pub reason: String,
}

/// Token patterns for the baseline detector, one `PATTERN<TAB>TYPE` per
/// line. Pattern positions are space-separated; each is `<NUM>`, `<NUM4>`,
/// `<ORD>` or literals separated by `|`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    patterns: Vec<Pattern>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut patterns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |reason: String| LexiconError { line: i + 1, reason };
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (pat, kind) = line
                .split_once('\t')
                .ok_or_else(|| err("expected PATTERN<TAB>TYPE".into()))?;
            let kind: TimexType = kind.trim().parse().map_err(|e: UnknownTimexType| err(e.to_string()))?;
            let elements: Vec<Element> = pat
                .split_whitespace()
                .map(|e| match e {
                    "<NUM>" => Element::Num,
                    "<NUM4>" => Element::Num4,
                    "<ORD>" => Element::Ord,
                    lit => Element::Literal(lit.split('|').map(str::to_lowercase).collect()),
                })
                .collect();
            if elements.is_empty() {
                return Err(err("empty pattern".into()));
            }
            patterns.push(Pattern { elements, kind });
        }
        Ok(Lexicon { patterns })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Greedy longest-match tagging; among patterns of equal length the first
/// in the lexicon wins.
pub fn baseline_detect<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> Vec<BioTag> {
    let mut tags = vec![BioTag::O; tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<(usize, TimexType)> = None;
        for p in &lexicon.patterns {
            let len = p.elements.len();
            if i + len > tokens.len() || best.is_some_and(|(l, _)| l >= len) {
                continue;
            }
            if p.elements.iter().zip(&tokens[i..]).all(|(e, t)| e.matches(t.as_ref())) {
                best = Some((len, p.kind));
            }
        }
        match best {
            Some((len, kind)) => {
                tags[i] = BioTag::B(kind);
                for t in &mut tags[i + 1..i + len] {
                    *t = BioTag::I(kind);
                }
                i += len;
            }
            None => i += 1,
        }
    }
    tags
}

/// Keeps the timexes that normalize, with their values attached.
pub fn filter_unnormalizable(timexes: Vec<Timex>, normalizer: &Normalizer, anchor: Anchor) -> Vec<Timex> {
    timexes
        .into_iter()
        .filter_map(|t| {
            let value = normalizer.normalize(&t.text, anchor).ok()?.value;
            Some(t.with_value(value))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    External,
    Baseline,
}

/// Tags for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorOutput {
    pub doc_id: String,
    pub tokens: Vec<String>,
    pub tags: Vec<BioTag>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorOutputError {
    #[error("{doc_id}: {tags} tags for {tokens} tokens")]
    Length { doc_id: String, tokens: usize, tags: usize },
    #[error("{doc_id}: tag {tag} at token {index} may not follow its predecessor")]
    Sequence { doc_id: String, index: usize, tag: BioTag },
}

impl DetectorOutput {
    pub fn new(
        doc_id: impl Into<String>,
        tokens: Vec<String>,
        tags: Vec<BioTag>,
        provenance: Provenance,
    ) -> Result<Self, DetectorOutputError> {
        let doc_id = doc_id.into();
        if tokens.len() != tags.len() {
            return Err(DetectorOutputError::Length {
                doc_id,
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        if let Some(index) = first_invalid(&tags) {
            return Err(DetectorOutputError::Sequence {
                doc_id,
                index,
                tag: tags[index],
            });
        }
        Ok(DetectorOutput {
            doc_id,
            tokens,
            tags,
            provenance,
        })
    }
}
