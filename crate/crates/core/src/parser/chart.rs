//! CYK+ chart parsing with dotted items.
//!
//! Spans are processed by increasing length. A dotted item records how many
//! source symbols of a rule are matched over a span; it is extended
//! left-to-right either by the next token (literals) or by a complete
//! constituent over the adjacent span. Completed constituents seed new items
//! for every rule starting with their label. Unit rules are closed per cell,
//! and a label may appear only once along a chain of same-span unit steps.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::grammar::{Grammar, IndexKey, NonTerminal, SourceSymbol, TargetSymbol};

use super::tree::{SourceNode, SourceTree, SyncParse, TargetNode, TargetTree};
use super::Token;

/// No complete parse covers the input. Carries the maximal spans over which
/// some constituent was completed, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseFailure {
    pub tokens: Vec<String>,
    pub partial_spans: Vec<(usize, usize)>,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no complete parse for {:?}", self.tokens.join(" "))?;
        if !self.partial_spans.is_empty() {
            f.write_str("; partial constituents over")?;
            for (s, e) in &self.partial_spans {
                write!(f, " [{s},{e})")?;
            }
        }
        Ok(())
    }
}

/// A completed constituent.
#[derive(Debug)]
struct Deriv {
    label: NonTerminal,
    rule: Option<usize>,
    start: usize,
    end: usize,
    children: Vec<Rc<Deriv>>,
    /// Identifies the (source, target) tree pair this constituent yields.
    shape: u32,
}

#[derive(Debug, Clone)]
struct Item {
    rule: usize,
    dot: usize,
    children: Vec<Rc<Deriv>>,
}

#[derive(Hash, PartialEq, Eq)]
enum ShapePart {
    Token(usize),
    Child(u32),
    Op(String),
    Int(i64),
    Bar,
}

struct Chart<'g> {
    grammar: &'g Grammar,
    tokens: Vec<String>,
    lowered: Vec<String>,
    n: usize,
    complete: Vec<Vec<Rc<Deriv>>>,
    items: Vec<Vec<Item>>,
    shapes: HashMap<(NonTerminal, Vec<ShapePart>), u32>,
    seen: HashSet<u32>,
}

impl<'g> Chart<'g> {
    fn cell(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    fn shape_of(&mut self, label: &NonTerminal, rule: Option<usize>, start: usize, children: &[Rc<Deriv>]) -> u32 {
        let mut parts = Vec::new();
        match rule {
            None => {
                parts.push(ShapePart::Token(start));
                parts.push(ShapePart::Bar);
                let n = self.numeric(start).unwrap_or_default();
                parts.push(ShapePart::Int(n));
            }
            Some(r) => {
                let rule = self.grammar.rule(r);
                let mut pos = start;
                let mut child_iter = children.iter();
                for sym in &rule.source {
                    match sym {
                        SourceSymbol::Literal(_) => {
                            parts.push(ShapePart::Token(pos));
                            pos += 1;
                        }
                        SourceSymbol::Nt(..) => {
                            let c = child_iter.next().expect("child per source non-terminal");
                            parts.push(ShapePart::Child(c.shape));
                            pos = c.end;
                        }
                    }
                }
                parts.push(ShapePart::Bar);
                for sym in &rule.target {
                    match sym {
                        TargetSymbol::Operator(o) => parts.push(ShapePart::Op(o.clone())),
                        TargetSymbol::IntConst(n) => parts.push(ShapePart::Int(*n)),
                        TargetSymbol::Nt(_, k) => {
                            let c = &children[nt_child_index(rule, *k)];
                            parts.push(ShapePart::Child(c.shape));
                        }
                    }
                }
            }
        }
        let next = self.shapes.len() as u32;
        *self.shapes.entry((label.clone(), parts)).or_insert(next)
    }

    fn numeric(&self, i: usize) -> Option<i64> {
        let t = &self.tokens[i];
        if t.bytes().all(|b| b.is_ascii_digit()) {
            t.parse().ok()
        } else {
            None
        }
    }

    fn make(&mut self, label: NonTerminal, rule: Option<usize>, start: usize, end: usize, children: Vec<Rc<Deriv>>) -> Rc<Deriv> {
        let shape = self.shape_of(&label, rule, start, &children);
        Rc::new(Deriv {
            label,
            rule,
            start,
            end,
            children,
            shape,
        })
    }

    /// Labels along the chain of same-span unit steps below `d`, inclusive.
    fn unit_chain_contains(&self, d: &Deriv, label: &NonTerminal) -> bool {
        let mut cur = d;
        loop {
            if &cur.label == label {
                return true;
            }
            match cur.children.as_slice() {
                [only] if only.start == cur.start && only.end == cur.end => cur = only,
                _ => return false,
            }
        }
    }

    fn advance(&mut self, item: &Item, child: Option<Rc<Deriv>>, start: usize, end: usize, completes: &mut VecDeque<Rc<Deriv>>, fresh: &mut Vec<Item>) {
        let mut children = item.children.clone();
        if let Some(c) = child {
            children.push(c);
        }
        let rule = self.grammar.rule(item.rule);
        let dot = item.dot + 1;
        if dot == rule.source.len() {
            let d = self.make(rule.parent.clone(), Some(item.rule), start, end, children);
            completes.push_back(d);
        } else {
            fresh.push(Item {
                rule: item.rule,
                dot,
                children,
            });
        }
    }

    fn fill(&mut self, i: usize, j: usize) {
        let mut completes: VecDeque<Rc<Deriv>> = VecDeque::new();
        let mut fresh: Vec<Item> = Vec::new();

        if j == i + 1 {
            let key = IndexKey::Literal(self.lowered[i].clone());
            let seed = Item {
                rule: usize::MAX,
                dot: 0,
                children: Vec::new(),
            };
            for &r in self.grammar.lookup(&key) {
                self.advance(&Item { rule: r, ..seed.clone() }, None, i, j, &mut completes, &mut fresh);
            }
            if let Some(n) = self.numeric(i) {
                let labels: Vec<NonTerminal> = self
                    .grammar
                    .int_labels()
                    .iter()
                    .filter(|l| l.accepts_number(n))
                    .cloned()
                    .collect();
                for label in labels {
                    let d = self.make(label, None, i, j, Vec::new());
                    completes.push_back(d);
                }
            }
        }

        for k in i + 1..j {
            let pending = self.items[self.cell(i, k)].clone();
            for item in &pending {
                let rule = self.grammar.rule(item.rule);
                match &rule.source[item.dot] {
                    SourceSymbol::Literal(lit) => {
                        if j == k + 1 && lit.to_lowercase() == self.lowered[k] {
                            self.advance(item, None, i, j, &mut completes, &mut fresh);
                        }
                    }
                    SourceSymbol::Nt(label, _) => {
                        let cands: Vec<Rc<Deriv>> = self.complete[self.cell(k, j)]
                            .iter()
                            .filter(|d| &d.label == label)
                            .cloned()
                            .collect();
                        for d in cands {
                            self.advance(item, Some(d), i, j, &mut completes, &mut fresh);
                        }
                    }
                }
            }
        }

        while let Some(d) = completes.pop_front() {
            if !self.seen.insert(d.shape) {
                continue;
            }
            let cell = self.cell(i, j);
            self.complete[cell].push(d.clone());
            let starters = self.grammar.lookup(&IndexKey::Nt(d.label.clone())).to_vec();
            for r in starters {
                let rule = self.grammar.rule(r);
                if rule.source.len() == 1 {
                    if self.unit_chain_contains(&d, &rule.parent) {
                        continue;
                    }
                    let parent = rule.parent.clone();
                    let nd = self.make(parent, Some(r), i, j, vec![d.clone()]);
                    completes.push_back(nd);
                } else {
                    fresh.push(Item {
                        rule: r,
                        dot: 1,
                        children: vec![d.clone()],
                    });
                }
            }
        }
        let cell = self.cell(i, j);
        self.items[cell].extend(fresh);
    }
}

fn nt_child_index(rule: &crate::grammar::SynchronousRule, k: u32) -> usize {
    rule.source_nts()
        .position(|(_, j)| j == k)
        .expect("alignment checked at load time")
}

/// Parses `tokens` into every complete synchronous derivation rooted at a
/// start category and covering the whole input.
pub fn parse(tokens: &[Token], grammar: &Grammar) -> Result<Vec<SyncParse>, ParseFailure> {
    let n = tokens.len();
    let texts: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    if n == 0 {
        return Err(ParseFailure {
            tokens: texts,
            partial_spans: Vec::new(),
        });
    }
    let cells = (n + 1) * (n + 1);
    let mut chart = Chart {
        grammar,
        lowered: texts.iter().map(|t| t.to_lowercase()).collect(),
        tokens: texts,
        n,
        complete: vec![Vec::new(); cells],
        items: vec![Vec::new(); cells],
        shapes: HashMap::new(),
        seen: HashSet::new(),
    };
    for len in 1..=n {
        for i in 0..=n - len {
            chart.fill(i, i + len);
        }
    }

    let roots: Vec<Rc<Deriv>> = chart.complete[chart.cell(0, n)]
        .iter()
        .filter(|d| grammar.is_start(&d.label))
        .cloned()
        .collect();
    if roots.is_empty() {
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in i + 1..=n {
                if !chart.complete[chart.cell(i, j)].is_empty() {
                    spans.push((i, j));
                }
            }
        }
        let maximal = spans
            .iter()
            .filter(|(s, e)| !spans.iter().any(|(s2, e2)| (s2, e2) != (s, e) && s2 <= s && e <= e2))
            .copied()
            .collect();
        return Err(ParseFailure {
            tokens: chart.tokens,
            partial_spans: maximal,
        });
    }
    Ok(roots.iter().map(|d| build(d, grammar, &chart.tokens)).collect())
}

fn build(root: &Rc<Deriv>, grammar: &Grammar, tokens: &[String]) -> SyncParse {
    // alignment ids are assigned breadth-first over the source tree
    let mut ids: HashMap<*const Deriv, usize> = HashMap::new();
    let mut queue = VecDeque::from([root.clone()]);
    while let Some(d) = queue.pop_front() {
        let next = ids.len() + 1;
        ids.insert(Rc::as_ptr(&d), next);
        queue.extend(d.children.iter().cloned());
    }
    let mut rules = Vec::new();
    let source = build_source(root, grammar, tokens, &ids, &mut rules);
    let target = build_target(root, grammar, &ids, tokens);
    SyncParse {
        source,
        target,
        rules,
    }
}

fn build_source(
    d: &Rc<Deriv>,
    grammar: &Grammar,
    tokens: &[String],
    ids: &HashMap<*const Deriv, usize>,
    rules: &mut Vec<Option<usize>>,
) -> SourceTree {
    rules.push(d.rule);
    let mut children = Vec::new();
    match d.rule {
        None => children.push(SourceNode::Token(d.start, tokens[d.start].clone())),
        Some(r) => {
            let mut pos = d.start;
            let mut kids = d.children.iter();
            for sym in &grammar.rule(r).source {
                match sym {
                    SourceSymbol::Literal(_) => {
                        children.push(SourceNode::Token(pos, tokens[pos].clone()));
                        pos += 1;
                    }
                    SourceSymbol::Nt(..) => {
                        let c = kids.next().expect("child per source non-terminal");
                        pos = c.end;
                        children.push(SourceNode::Tree(build_source(c, grammar, tokens, ids, rules)));
                    }
                }
            }
        }
    }
    SourceTree {
        id: ids[&Rc::as_ptr(d)],
        label: d.label.clone(),
        children,
    }
}

fn build_target(d: &Rc<Deriv>, grammar: &Grammar, ids: &HashMap<*const Deriv, usize>, tokens: &[String]) -> TargetTree {
    let children = match d.rule {
        None => vec![TargetNode::Int(tokens[d.start].parse().unwrap_or_default())],
        Some(r) => {
            let rule = grammar.rule(r);
            rule.target
                .iter()
                .map(|sym| match sym {
                    TargetSymbol::Operator(o) => TargetNode::Operator(o.clone()),
                    TargetSymbol::IntConst(n) => TargetNode::Int(*n),
                    TargetSymbol::Nt(_, k) => {
                        let c = &d.children[nt_child_index(rule, *k)];
                        TargetNode::Tree(build_target(c, grammar, ids, tokens))
                    }
                })
                .collect()
        }
    };
    TargetTree {
        id: ids[&Rc::as_ptr(d)],
        label: d.label.clone(),
        children,
    }
}
