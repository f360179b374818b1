//! Synchronous context-free grammars: file format, validation and indexing.
//!
//! A grammar file holds one rule per line:
//!
//! ```text
//! [Parent] ||| source symbols ||| target symbols
//! ```
//!
//! Non-terminals are written `[Category]`, `[Category:Subtype]` or
//! `[Int:lo-hi]`, and every occurrence inside a rule carries a rule-local
//! alignment index (`[Field:Day]~3`). Source symbols are literal tokens or
//! aligned non-terminals; target symbols are registry operators, integers,
//! aligned non-terminals, or a lone `_` for the empty target of a `[Nil]`
//! rule. Lines starting with `#` are comments, and `#!` lines are header
//! directives (`#! part-of-day <Name> <from>-<to>` and `#! lang <code>`).

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::eval::calendar::{PartOfDay, PartOfDayTable};
use crate::eval::operators;
use crate::parser::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    TimeSpan,
    Period,
    Field,
    Unit,
    Int,
    Nil,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::TimeSpan,
        Category::Period,
        Category::Field,
        Category::Unit,
        Category::Int,
        Category::Nil,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::TimeSpan => "TimeSpan",
            Category::Period => "Period",
            Category::Field => "Field",
            Category::Unit => "Unit",
            Category::Int => "Int",
            Category::Nil => "Nil",
        }
    }

    /// Categories a complete parse may be rooted at.
    pub fn is_start(self) -> bool {
        matches!(self, Category::TimeSpan | Category::Period)
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// A non-terminal label such as `[Field:Month]` or `[Int:1-31]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonTerminal {
    pub category: Category,
    pub subtype: Option<String>,
    pub int_range: Option<(i64, i64)>,
}

impl NonTerminal {
    pub fn new(category: Category) -> Self {
        NonTerminal {
            category,
            subtype: None,
            int_range: None,
        }
    }

    pub fn with_subtype(category: Category, subtype: impl Into<String>) -> Self {
        NonTerminal {
            category,
            subtype: Some(subtype.into()),
            int_range: None,
        }
    }

    pub fn int(lo: i64, hi: i64) -> Self {
        NonTerminal {
            category: Category::Int,
            subtype: None,
            int_range: Some((lo, hi)),
        }
    }

    pub fn is_nil(&self) -> bool {
        self.category == Category::Nil
    }

    pub fn accepts_number(&self, n: i64) -> bool {
        matches!(self.int_range, Some((lo, hi)) if lo <= n && n <= hi)
    }

    fn check(&self) -> Result<(), String> {
        if let Some((lo, hi)) = self.int_range {
            if self.category != Category::Int {
                return Err(format!("{self}: only Int labels take a range"));
            }
            if lo > hi {
                return Err(format!("{self}: empty range"));
            }
        }
        if self.category == Category::Nil && self.subtype.is_some() {
            return Err(format!("{self}: Nil takes no subtype"));
        }
        if self.category == Category::Int && self.subtype.is_some() {
            return Err(format!("{self}: Int takes a range, not a subtype"));
        }
        Ok(())
    }
}

impl fmt::Display for NonTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.category.as_str())?;
        if let Some(s) = &self.subtype {
            write!(f, ":{s}")?;
        }
        if let Some((lo, hi)) = self.int_range {
            write!(f, ":{lo}-{hi}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("malformed non-terminal `{0}`")]
    Malformed(String),
    #[error("unknown non-terminal category `{0}`")]
    UnknownCategory(String),
    #[error("{0}")]
    Invalid(String),
}

impl FromStr for NonTerminal {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .filter(|r| !r.is_empty() && !r.contains(['[', ']']))
            .ok_or_else(|| LabelError::Malformed(s.to_string()))?;
        let (cat, rest) = match inner.split_once(':') {
            Some((c, r)) => (c, Some(r)),
            None => (inner, None),
        };
        let category: Category = cat
            .parse()
            .map_err(|_| LabelError::UnknownCategory(cat.to_string()))?;
        let mut nt = NonTerminal::new(category);
        match rest {
            None => {}
            Some("") => return Err(LabelError::Malformed(s.to_string())),
            Some(r) if category == Category::Int => {
                let range = parse_range(r).ok_or_else(|| LabelError::Malformed(s.to_string()))?;
                nt.int_range = Some(range);
            }
            Some(r) => nt.subtype = Some(r.to_string()),
        }
        nt.check().map_err(LabelError::Invalid)?;
        Ok(nt)
    }
}

fn parse_range(r: &str) -> Option<(i64, i64)> {
    // the upper bound may itself be negative: "-5--1"
    let bytes = r.as_bytes();
    let split = (1..bytes.len()).find(|&i| bytes[i] == b'-')?;
    let lo = r[..split].parse().ok()?;
    let hi = r[split + 1..].parse().ok()?;
    Some((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceSymbol {
    Literal(String),
    Nt(NonTerminal, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetSymbol {
    Operator(String),
    IntConst(i64),
    Nt(NonTerminal, u32),
}

impl fmt::Display for SourceSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSymbol::Literal(s) => f.write_str(s),
            SourceSymbol::Nt(nt, k) => write!(f, "{nt}~{k}"),
        }
    }
}

impl fmt::Display for TargetSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSymbol::Operator(s) => f.write_str(s),
            TargetSymbol::IntConst(n) => write!(f, "{n}"),
            TargetSymbol::Nt(nt, k) => write!(f, "{nt}~{k}"),
        }
    }
}

/// Stable rule identifier: grammar name plus 1-based ordinal in file order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId {
    pub grammar: Arc<str>,
    pub ordinal: usize,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.grammar, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynchronousRule {
    pub id: RuleId,
    pub parent: NonTerminal,
    pub source: Vec<SourceSymbol>,
    pub target: Vec<TargetSymbol>,
}

impl SynchronousRule {
    /// Source position of the non-terminal aligned with index `k`.
    pub fn source_position(&self, k: u32) -> Option<usize> {
        self.source
            .iter()
            .position(|s| matches!(s, SourceSymbol::Nt(_, j) if *j == k))
    }

    pub fn source_nts(&self) -> impl Iterator<Item = (&NonTerminal, u32)> {
        self.source.iter().filter_map(|s| match s {
            SourceSymbol::Nt(nt, k) => Some((nt, *k)),
            SourceSymbol::Literal(_) => None,
        })
    }

    fn same_content(&self, other: &SynchronousRule) -> bool {
        self.parent == other.parent && self.source == other.source && self.target == other.target
    }

    fn check(&self) -> Result<(), GrammarError> {
        let id = || self.id.clone();
        if self.source.is_empty() {
            return Err(GrammarError::Invalid {
                rule: id(),
                reason: "empty source side".into(),
            });
        }
        if self.target.is_empty() && !self.parent.is_nil() {
            return Err(GrammarError::Invalid {
                rule: id(),
                reason: format!("empty target is only allowed for [Nil], not {}", self.parent),
            });
        }
        self.parent.check().map_err(|reason| GrammarError::Invalid { rule: id(), reason })?;
        let mut src: HashMap<u32, &NonTerminal> = HashMap::new();
        for sym in &self.source {
            match sym {
                SourceSymbol::Literal(lit) if lit.is_empty() => {
                    return Err(GrammarError::Invalid {
                        rule: id(),
                        reason: "empty literal".into(),
                    })
                }
                SourceSymbol::Literal(_) => {}
                SourceSymbol::Nt(nt, k) => {
                    nt.check().map_err(|reason| GrammarError::Invalid { rule: id(), reason })?;
                    if src.insert(*k, nt).is_some() {
                        return Err(GrammarError::Alignment {
                            rule: id(),
                            detail: format!("index {k} used twice on the source side"),
                        });
                    }
                }
            }
        }
        let mut seen = HashSet::new();
        for sym in &self.target {
            match sym {
                TargetSymbol::Operator(name) if !operators::is_known(name) => {
                    return Err(GrammarError::UnknownOperator {
                        rule: id(),
                        name: name.clone(),
                    })
                }
                TargetSymbol::Nt(nt, k) => {
                    if !seen.insert(*k) {
                        return Err(GrammarError::Alignment {
                            rule: id(),
                            detail: format!("index {k} used twice on the target side"),
                        });
                    }
                    match src.get(k) {
                        None => {
                            return Err(GrammarError::Alignment {
                                rule: id(),
                                detail: format!("target {nt}~{k} has no source counterpart"),
                            })
                        }
                        Some(s) if *s != nt => {
                            return Err(GrammarError::Alignment {
                                rule: id(),
                                detail: format!("index {k} aligns {s} with {nt}"),
                            })
                        }
                        Some(_) => {}
                    }
                }
                _ => {}
            }
        }
        if let Some(k) = src.keys().filter(|k| !seen.contains(k)).min() {
            return Err(GrammarError::Alignment {
                rule: id(),
                detail: format!("source {}~{k} has no target counterpart", src[k]),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SynchronousRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |||", self.parent)?;
        for s in &self.source {
            write!(f, " {s}")?;
        }
        f.write_str(" |||")?;
        if self.target.is_empty() {
            f.write_str(" _")?;
        }
        for t in &self.target {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown non-terminal category `{name}`")]
    UnknownCategory { line: usize, name: String },
    #[error("rule {rule}: alignment violation: {detail}")]
    Alignment { rule: RuleId, detail: String },
    #[error("rule {rule}: unknown operator `{name}`")]
    UnknownOperator { rule: RuleId, name: String },
    #[error("rule {rule}: {reason}")]
    Invalid { rule: RuleId, reason: String },
}

/// Key under which rules are indexed: their first source symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexKey {
    /// Lowercased literal token.
    Literal(String),
    Nt(NonTerminal),
}

impl IndexKey {
    pub fn literal(token: &str) -> Self {
        IndexKey::Literal(token.to_lowercase())
    }
}

/// Per-grammar evaluation settings read from `#!` header lines.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrammarConfig {
    pub part_of_day: PartOfDayTable,
    /// Language code from `#! lang <code>`, if declared.
    pub lang: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    name: Arc<str>,
    rules: Vec<SynchronousRule>,
    index: HashMap<IndexKey, Vec<usize>>,
    int_labels: Vec<NonTerminal>,
    duplicates: Vec<(RuleId, RuleId)>,
    pub config: GrammarConfig,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.rules.len() == other.rules.len()
            && self.rules.iter().zip(&other.rules).all(|(a, b)| a.same_content(b))
            && self.config == other.config
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    Unreachable { label: NonTerminal, rules: Vec<RuleId> },
    SplitLiteral { rule: RuleId, literal: String, pieces: Vec<String> },
    Duplicate { rule: RuleId, first: RuleId },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Unreachable { label, rules } => {
                write!(f, "warning: {label} is unreachable from any start category (")?;
                for (i, r) in rules.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{r}")?;
                }
                f.write_str(")")
            }
            Diagnostic::SplitLiteral {
                rule,
                literal,
                pieces,
            } => write!(
                f,
                "warning: rule {rule}: literal `{literal}` is split by the tokenizer into {pieces:?} and can never match"
            ),
            Diagnostic::Duplicate { rule, first } => {
                write!(f, "warning: rule {rule} duplicates rule {first} and was dropped")
            }
        }
    }
}

pub const DEFAULT_NAME: &str = "<inline>";

/// Parses grammar text with the default name.
pub fn load_grammar(text: &str) -> Result<Grammar, GrammarError> {
    Grammar::parse_named(DEFAULT_NAME, text)
}

impl Grammar {
    pub fn parse_named(name: &str, text: &str) -> Result<Grammar, GrammarError> {
        let name: Arc<str> = Arc::from(name);
        let mut config = GrammarConfig::default();
        let mut rules = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if let Some(directive) = trimmed.strip_prefix("#!") {
                apply_directive(&mut config, directive, line_no)?;
                continue;
            }
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let id = RuleId {
                grammar: name.clone(),
                ordinal: rules.len() + 1,
            };
            rules.push(parse_rule_line(trimmed, line_no, id)?);
        }
        Grammar::build(name, rules, config)
    }

    /// Builds a grammar from rules constructed in code. Ordinals are
    /// reassigned from the slice order.
    pub fn from_rules(
        name: &str,
        rules: Vec<SynchronousRule>,
        config: GrammarConfig,
    ) -> Result<Grammar, GrammarError> {
        let name: Arc<str> = Arc::from(name);
        let rules = rules
            .into_iter()
            .enumerate()
            .map(|(i, r)| SynchronousRule {
                id: RuleId {
                    grammar: name.clone(),
                    ordinal: i + 1,
                },
                ..r
            })
            .collect();
        Grammar::build(name, rules, config)
    }

    fn build(
        name: Arc<str>,
        parsed: Vec<SynchronousRule>,
        config: GrammarConfig,
    ) -> Result<Grammar, GrammarError> {
        let mut rules: Vec<SynchronousRule> = Vec::with_capacity(parsed.len());
        let mut duplicates = Vec::new();
        for rule in parsed {
            rule.check()?;
            if let Some(first) = rules.iter().find(|r| r.same_content(&rule)) {
                duplicates.push((rule.id.clone(), first.id.clone()));
                continue;
            }
            rules.push(rule);
        }
        let mut index: HashMap<IndexKey, Vec<usize>> = HashMap::new();
        let mut int_labels = BTreeSet::new();
        for (i, rule) in rules.iter().enumerate() {
            let key = match &rule.source[0] {
                SourceSymbol::Literal(l) => IndexKey::literal(l),
                SourceSymbol::Nt(nt, _) => IndexKey::Nt(nt.clone()),
            };
            index.entry(key).or_default().push(i);
            for (nt, _) in rule.source_nts() {
                if nt.int_range.is_some() {
                    int_labels.insert(nt.clone());
                }
            }
            if rule.parent.int_range.is_some() {
                int_labels.insert(rule.parent.clone());
            }
        }
        Ok(Grammar {
            name,
            rules,
            index,
            int_labels: int_labels.into_iter().collect(),
            duplicates,
            config,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rules(&self) -> &[SynchronousRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, i: usize) -> &SynchronousRule {
        &self.rules[i]
    }

    /// Indices of rules whose first source symbol is `key`, in file order.
    pub fn lookup(&self, key: &IndexKey) -> &[usize] {
        self.index.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Int labels with a range that bare numeric tokens can complete.
    pub fn int_labels(&self) -> &[NonTerminal] {
        &self.int_labels
    }

    pub fn is_start(&self, nt: &NonTerminal) -> bool {
        nt.category.is_start()
    }

    /// Serializes to the line format accepted by [`load_grammar`].
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        if let Some(lang) = &self.config.lang {
            out.push_str(&format!("#! lang {lang}\n"));
        }
        let defaults = PartOfDayTable::default();
        for part in PartOfDay::ALL {
            let (from, to) = self.config.part_of_day.hours(part);
            if (from, to) != defaults.hours(part) {
                out.push_str(&format!("#! part-of-day {} {from}-{to}\n", part.name()));
            }
        }
        for rule in &self.rules {
            out.push_str(&rule.to_string());
            out.push('\n');
        }
        out
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate_grammar(self)
    }
}

fn apply_directive(config: &mut GrammarConfig, directive: &str, line: usize) -> Result<(), GrammarError> {
    let err = |reason: String| GrammarError::Syntax { line, reason };
    let words: Vec<&str> = directive.split_whitespace().collect();
    match words.as_slice() {
        ["part-of-day", name, range] => {
            let part = PartOfDay::from_name(name)
                .ok_or_else(|| err(format!("unknown part of day `{name}`")))?;
            let (from, to) = range
                .split_once('-')
                .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
                .ok_or_else(|| err(format!("malformed hour range `{range}`")))?;
            config
                .part_of_day
                .set(part, from, to)
                .map_err(|e| err(e.to_string()))
        }
        ["lang", code] => {
            if config.lang.replace(code.to_string()).is_some() {
                return Err(err("repeated `lang` directive".into()));
            }
            Ok(())
        }
        [] => Ok(()),
        _ => Err(err(format!("unknown directive `{}`", directive.trim()))),
    }
}

fn parse_rule_line(line: &str, line_no: usize, id: RuleId) -> Result<SynchronousRule, GrammarError> {
    let syntax = |reason: String| GrammarError::Syntax {
        line: line_no,
        reason,
    };
    let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
    if fields.len() != 3 {
        return Err(syntax(format!(
            "expected `[Parent] ||| source ||| target`, found {} field(s)",
            fields.len()
        )));
    }
    let label = |text: &str| -> Result<NonTerminal, GrammarError> {
        text.parse().map_err(|e| match e {
            LabelError::UnknownCategory(name) => GrammarError::UnknownCategory {
                line: line_no,
                name,
            },
            other => syntax(other.to_string()),
        })
    };
    let aligned = |tok: &str| -> Result<(NonTerminal, u32), GrammarError> {
        let (lab, k) = tok
            .rsplit_once("]~")
            .ok_or_else(|| syntax(format!("non-terminal `{tok}` needs an alignment index `~k`")))?;
        let k = k
            .parse()
            .map_err(|_| syntax(format!("bad alignment index in `{tok}`")))?;
        Ok((label(&format!("{lab}]"))?, k))
    };
    let parent = label(fields[0])?;
    if fields[1].is_empty() {
        return Err(syntax("empty source side".into()));
    }
    let mut source = Vec::new();
    for tok in fields[1].split_whitespace() {
        if tok.starts_with('[') && tok.len() > 1 {
            let (nt, k) = aligned(tok)?;
            source.push(SourceSymbol::Nt(nt, k));
        } else {
            source.push(SourceSymbol::Literal(tok.to_string()));
        }
    }
    let mut target = Vec::new();
    let tgt_tokens: Vec<&str> = fields[2].split_whitespace().collect();
    match tgt_tokens.as_slice() {
        [] => return Err(syntax("empty target side; write `_` for an empty target".into())),
        ["_"] => {}
        toks => {
            for tok in toks {
                if *tok == "_" {
                    return Err(syntax("`_` must stand alone".into()));
                } else if tok.starts_with('[') {
                    let (nt, k) = aligned(tok)?;
                    target.push(TargetSymbol::Nt(nt, k));
                } else if let Ok(n) = tok.parse::<i64>() {
                    target.push(TargetSymbol::IntConst(n));
                } else {
                    target.push(TargetSymbol::Operator(tok.to_string()));
                }
            }
        }
    }
    Ok(SynchronousRule {
        id,
        parent,
        source,
        target,
    })
}

/// Reports unreachable labels, literals the tokenizer would split, and
/// duplicate rules dropped at load time.
pub fn validate_grammar(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut reached: HashSet<&NonTerminal> = HashSet::new();
    let mut queue: VecDeque<&NonTerminal> = VecDeque::new();
    for rule in &g.rules {
        if rule.parent.category.is_start() && reached.insert(&rule.parent) {
            queue.push_back(&rule.parent);
        }
    }
    while let Some(nt) = queue.pop_front() {
        for rule in g.rules.iter().filter(|r| &r.parent == nt) {
            for (child, _) in rule.source_nts() {
                if reached.insert(child) {
                    queue.push_back(child);
                }
            }
        }
    }
    let mut unreachable: Vec<(NonTerminal, Vec<RuleId>)> = Vec::new();
    for rule in &g.rules {
        if reached.contains(&rule.parent) {
            continue;
        }
        match unreachable.iter_mut().find(|(l, _)| *l == rule.parent) {
            Some((_, ids)) => ids.push(rule.id.clone()),
            None => unreachable.push((rule.parent.clone(), vec![rule.id.clone()])),
        }
    }
    out.extend(
        unreachable
            .into_iter()
            .map(|(label, rules)| Diagnostic::Unreachable { label, rules }),
    );

    for rule in &g.rules {
        for sym in &rule.source {
            if let SourceSymbol::Literal(lit) = sym {
                let pieces: Vec<String> = tokenize(lit).into_iter().map(|t| t.text).collect();
                if pieces.len() != 1 || pieces[0] != *lit {
                    out.push(Diagnostic::SplitLiteral {
                        rule: rule.id.clone(),
                        literal: lit.clone(),
                        pieces,
                    });
                }
            }
        }
    }

    out.extend(
        g.duplicates
            .iter()
            .map(|(rule, first)| Diagnostic::Duplicate {
                rule: rule.clone(),
                first: first.clone(),
            }),
    );
    out
}
