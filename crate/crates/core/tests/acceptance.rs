//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::Range;
use std::time::{Duration as StdDuration, Instant};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use timex_core::corpus::{read_tabulated, write_tabulated, Entity, TabulatedDocument};
use timex_core::eval::calendar::{
    find_matching, granule_containing, granule_end, CalendarError, CalendarField, Direction, FieldMap,
    FieldValue, Interval, PartOfDay, PartOfDayTable, SpanUnit,
};
use timex_core::evaluator::{score, DocumentPair};
use timex_core::grammar::{Category, NonTerminal};
use timex_core::parser::{SourceNode, SourceTree, TargetNode, TargetTree};
use timex_core::{
    load_grammar, parse, tokenize, values_equivalent, Anchor, Evaluator, Grammar, Language, Mode, NormalizeError,
    Normalizer, Pipeline, SyncParse, TemporalObject, Timex, TimexType,
};

// tolerances and sizes
const METRIC_TOLERANCE: f64 = 1e-9;
const WORKED_EXAMPLES_BUDGET: StdDuration = StdDuration::from_secs(1);
const MEDIAN_LATENCY_BUDGET: StdDuration = StdDuration::from_millis(10);
const BATCH_BUDGET: StdDuration = StdDuration::from_secs(30);
const PARSER_GRAMMARS: usize = 200;
const PARSER_INPUTS_PER_GRAMMAR: usize = 12;
const METRIC_CORPORA: usize = 500;
const MONOTONICITY_CORPORA: usize = 60;
const OPERATOR_PAIRS: usize = 10_000;
const ROUND_TRIPS: usize = 1_000;
const BATCH_SIZE: usize = 10_000;

type Criterion = fn() -> Outcome;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            detail: detail.into(),
        }
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 7] = [
        ("1 worked examples", worked_examples),
        ("2 parser oracle equivalence", parser_oracle),
        ("3 metric oracle", metric_oracle),
        ("4 normalization-focused monotonicity", monotonicity),
        ("5 temporal operator properties", operator_properties),
        ("6 round trips", round_trips),
        ("7 performance", performance),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let out = check();
        println!("{} {name}: {}", if out.ok { "PASS" } else { "FAIL" }, out.detail);
        if !out.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn anchor() -> Anchor {
    Anchor::ymd(2013, 4, 10).unwrap()
}

// ---------------------------------------------------------------------------
// 1

fn worked_examples() -> Outcome {
    let started = Instant::now();
    let mut problems = Vec::new();
    let es = Normalizer::new(Language::Es.grammar());
    let en = Normalizer::new(Language::En.grammar());

    match es.normalize("dos días", anchor()) {
        Ok(n) if n.value == "P2D" && n.kind == TimexType::Duration => {}
        other => problems.push(format!("dos días: {other:?}")),
    }

    let marzo = "([TimeSpan] FindEarlier Present ([Field] ([Field:Month] MonthOfYear 3) \
                 ([Field:Day] DayOfMonth ([Int:1-31] 6)) ([Nil])))";
    match es.normalize("6 de marzo", anchor()) {
        Ok(n) if n.parse.target.bracketed() == marzo && n.value == "2013-03-06" => {}
        Ok(n) => problems.push(format!("6 de marzo: {} {}", n.value, n.parse.target.bracketed())),
        Err(e) => problems.push(format!("6 de marzo: {e}")),
    }

    match en.normalize("a decade", anchor()) {
        Ok(n) if n.value == "P1DE" => {}
        other => problems.push(format!("a decade: {other:?}")),
    }
    if !values_equivalent("P1DE", "P10Y") {
        problems.push("P1DE is not equivalent to P10Y".into());
    }

    match es.normalize("un día de 2002", anchor()) {
        Ok(n) if n.value == "2002-XX-XX" => {}
        other => problems.push(format!("un día de 2002: {other:?}")),
    }

    match es.normalize("un momento dado de la historia", anchor()) {
        Err(NormalizeError::Parse(_)) => {}
        other => problems.push(format!("un momento dado de la historia: {other:?}")),
    }

    // the same expression through detection and normalization
    let doc = TabulatedDocument::from_entities(
        "d1",
        anchor(),
        ["Esperó", "durante", "dos", "días", "."].map(String::from).to_vec(),
        &[],
    );
    let pipeline = Pipeline::bundled(Language::Es, Mode::DetectionFocused);
    match pipeline.process(&doc) {
        Ok((out, _)) => {
            let ents = out.entities();
            let want = Entity {
                span: 2..4,
                kind: TimexType::Duration,
                value: Some("P2D".into()),
            };
            if ents != vec![want] {
                problems.push(format!("pipeline on dos días: {ents:?}"));
            }
        }
        Err(e) => problems.push(format!("pipeline: {e}")),
    }

    let elapsed = started.elapsed();
    if elapsed >= WORKED_EXAMPLES_BUDGET {
        problems.push(format!("took {elapsed:?}"));
    }
    Outcome::new(
        problems.is_empty(),
        if problems.is_empty() {
            format!("6/6 examples exact in {elapsed:?}")
        } else {
            problems.join("; ")
        },
    )
}

// ---------------------------------------------------------------------------
// 2

const VOCAB: [&str; 6] = ["a", "b", "c", "B", "1", "7"];
const OPS: [&str; 6] = ["Present", "Simple", "Days", "MonthOfYear", "Sum", "FindEarlier"];

fn label_pool() -> Vec<NonTerminal> {
    vec![
        NonTerminal::new(Category::TimeSpan),
        NonTerminal::new(Category::Period),
        NonTerminal::new(Category::Field),
        NonTerminal::with_subtype(Category::Field, "A"),
        NonTerminal::new(Category::Unit),
        NonTerminal::new(Category::Nil),
        NonTerminal::int(1, 5),
        NonTerminal::int(0, 9),
    ]
}

fn random_rule(rng: &mut StdRng, pool: &[NonTerminal]) -> String {
    let literal = |rng: &mut StdRng| ["a", "b", "c", "A", "1"][rng.gen_range(0..5)].to_string();
    let parent = pool.choose(rng).unwrap().clone();
    if parent.is_nil() {
        let n = rng.gen_range(1..=2);
        let src: Vec<String> = (0..n).map(|_| literal(rng)).collect();
        return format!("{parent} ||| {} ||| _", src.join(" "));
    }
    let len = rng.gen_range(1..=3);
    let mut src = Vec::new();
    let mut nts = Vec::new();
    for _ in 0..len {
        if rng.gen_bool(0.55) {
            let k = nts.len() as u32 + 1;
            let nt = pool.choose(rng).unwrap().clone();
            src.push(format!("{nt}~{k}"));
            nts.push(format!("{nt}~{k}"));
        } else {
            src.push(literal(rng));
        }
    }
    let mut tgt: Vec<String> = Vec::new();
    let extra = rng.gen_range(usize::from(nts.is_empty())..=2);
    for _ in 0..extra {
        if rng.gen_bool(0.7) {
            tgt.push(OPS.choose(rng).unwrap().to_string());
        } else {
            tgt.push(rng.gen_range(0..20).to_string());
        }
    }
    nts.shuffle(rng);
    for nt in nts {
        let at = rng.gen_range(0..=tgt.len());
        tgt.insert(at, nt);
    }
    format!("{parent} ||| {} ||| {}", src.join(" "), tgt.join(" "))
}

fn random_grammar_text(rng: &mut StdRng, pool: &[NonTerminal]) -> String {
    let n = rng.gen_range(1..=12);
    let mut lines: Vec<String> = (0..n).map(|_| random_rule(rng, pool)).collect();
    // make start categories reachable more often
    if rng.gen_bool(0.5) {
        let start = if rng.gen_bool(0.5) { "[TimeSpan]" } else { "[Period]" };
        let child = pool.choose(rng).unwrap();
        let tgt = if child.is_nil() { format!("Present {child}~1") } else { format!("{child}~1") };
        lines.truncate(11);
        lines.push(format!("{start} ||| {child}~1 a ||| {tgt}"));
    }
    // an ambiguous binary rule with crossed alignment
    if rng.gen_bool(0.3) {
        let x = ["[TimeSpan]", "[Period]"].choose(rng).unwrap();
        lines.truncate(11);
        lines.push(format!("{x} ||| {x}~1 {x}~2 ||| Sum {x}~2 {x}~1"));
    }
    lines.join("\n")
}

/// Source span of every node id.
fn source_spans(t: &SourceTree, out: &mut HashMap<usize, (usize, usize)>) -> (usize, usize) {
    let mut lo = usize::MAX;
    let mut hi = 0;
    for c in &t.children {
        let (s, e) = match c {
            SourceNode::Token(i, _) => (*i, *i + 1),
            SourceNode::Tree(sub) => source_spans(sub, out),
        };
        lo = lo.min(s);
        hi = hi.max(e);
    }
    out.insert(t.id, (lo, hi));
    (lo, hi)
}

fn target_with_spans(t: &TargetTree, spans: &HashMap<usize, (usize, usize)>) -> String {
    let (s, e) = spans[&t.id];
    let mut out = format!("({}@{s}-{e}", t.label);
    for c in &t.children {
        out.push(' ');
        match c {
            TargetNode::Operator(o) => out.push_str(o),
            TargetNode::Int(n) => out.push_str(&n.to_string()),
            TargetNode::Tree(sub) => out.push_str(&target_with_spans(sub, spans)),
        }
    }
    out.push(')');
    out
}

fn render_parse(p: &SyncParse) -> (String, String) {
    let mut spans = HashMap::new();
    source_spans(&p.source, &mut spans);
    (p.source.bracketed(), target_with_spans(&p.target, &spans))
}

#[derive(Debug, Clone)]
enum OSrc {
    Lit(String),
    Nt(NonTerminal, u32),
}

#[derive(Debug, Clone)]
enum OTgt {
    Word(String),
    Nt(u32),
}

struct ORule {
    parent: NonTerminal,
    source: Vec<OSrc>,
    target: Vec<OTgt>,
}

/// Rules re-read from the text independently of the grammar loader.
fn oracle_rules(text: &str) -> Vec<ORule> {
    let mut rules: Vec<ORule> = Vec::new();
    let mut seen = HashSet::new();
    for line in text.lines() {
        if !seen.insert(line.to_string()) {
            continue;
        }
        let parts: Vec<&str> = line.split("|||").map(str::trim).collect();
        let parent: NonTerminal = parts[0].parse().unwrap();
        let source = parts[1]
            .split_whitespace()
            .map(|w| match w.split_once('~') {
                Some((l, k)) => OSrc::Nt(l.parse().unwrap(), k.parse().unwrap()),
                None => OSrc::Lit(w.to_lowercase()),
            })
            .collect();
        let target = parts[2]
            .split_whitespace()
            .filter(|w| *w != "_")
            .map(|w| match w.split_once('~') {
                Some((_, k)) => OTgt::Nt(k.parse().unwrap()),
                None => OTgt::Word(w.to_string()),
            })
            .collect();
        rules.push(ORule { parent, source, target });
    }
    rules
}

struct Oracle<'a> {
    rules: &'a [ORule],
    tokens: &'a [String],
    int_labels: BTreeSet<NonTerminal>,
    depth_bound: usize,
    max_depth: usize,
}

type Pairs = Vec<(String, String)>;

impl Oracle<'_> {
    /// Every derivation of `label` over `i..j`; `chain` holds the labels of
    /// the same-span unit chain above this node.
    fn derive(&mut self, label: &NonTerminal, i: usize, j: usize, chain: &mut Vec<NonTerminal>, depth: usize) -> Pairs {
        self.max_depth = self.max_depth.max(depth);
        if depth > self.depth_bound {
            return Vec::new();
        }
        let mut out = Vec::new();
        if j == i + 1 && self.int_labels.contains(label) {
            let tok = &self.tokens[i];
            if !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(n) = tok.parse::<i64>() {
                    if label.accepts_number(n) {
                        out.push((format!("({label} \"{tok}\")"), format!("({label}@{i}-{j} {n})")));
                    }
                }
            }
        }
        chain.push(label.clone());
        for r in self.rules.iter().filter(|r| &r.parent == label) {
            if let [OSrc::Nt(child, _)] = r.source.as_slice() {
                if chain.contains(child) {
                    continue;
                }
                let subs = self.derive(child, i, j, chain, depth + 1);
                for (s, t) in subs {
                    let src = format!("({label} {s})");
                    let tgt = self.render_target(r, label, i, j, &[t]);
                    out.push((src, tgt));
                }
                continue;
            }
            for (src_parts, tgt_kids) in self.expand(r, 0, i, j, depth) {
                let src = format!("({label} {})", src_parts.join(" "));
                out.push((src, self.render_target(r, label, i, j, &tgt_kids)));
            }
        }
        chain.pop();
        out
    }

    fn render_target(&self, r: &ORule, label: &NonTerminal, i: usize, j: usize, kids: &[String]) -> String {
        let order: Vec<u32> = r
            .source
            .iter()
            .filter_map(|s| match s {
                OSrc::Nt(_, k) => Some(*k),
                OSrc::Lit(_) => None,
            })
            .collect();
        let mut out = format!("({label}@{i}-{j}");
        for sym in &r.target {
            out.push(' ');
            match sym {
                OTgt::Word(w) => out.push_str(w),
                OTgt::Nt(k) => {
                    let pos = order.iter().position(|x| x == k).unwrap();
                    out.push_str(&kids[pos]);
                }
            }
        }
        out.push(')');
        out
    }

    /// Ways to cover `i..j` with `r.source[at..]`: source pieces and target
    /// strings of the non-terminal children in source order.
    fn expand(&mut self, r: &ORule, at: usize, i: usize, j: usize, depth: usize) -> Vec<(Vec<String>, Vec<String>)> {
        if at == r.source.len() {
            return if i == j { vec![(Vec::new(), Vec::new())] } else { Vec::new() };
        }
        let remaining = r.source.len() - at;
        if j - i < remaining {
            return Vec::new();
        }
        let mut out = Vec::new();
        match &r.source[at] {
            OSrc::Lit(l) => {
                if self.tokens[i].to_lowercase() == *l {
                    for (mut s, t) in self.expand(r, at + 1, i + 1, j, depth) {
                        s.insert(0, format!("\"{}\"", self.tokens[i]));
                        out.push((s, t));
                    }
                }
            }
            OSrc::Nt(child, _) => {
                for mid in i + 1..=j - (remaining - 1) {
                    let heads = self.derive(child, i, mid, &mut Vec::new(), depth + 1);
                    if heads.is_empty() {
                        continue;
                    }
                    let tails = self.expand(r, at + 1, mid, j, depth);
                    for (hs, ht) in &heads {
                        for (ts, tt) in &tails {
                            let mut s = vec![hs.clone()];
                            s.extend(ts.iter().cloned());
                            let mut t = vec![ht.clone()];
                            t.extend(tt.iter().cloned());
                            out.push((s, t));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Token yield of a random derivation from `label`, used to draw inputs the
/// grammar can cover.
fn sample_yield(rules: &[ORule], label: &NonTerminal, rng: &mut StdRng, depth: usize) -> Option<Vec<String>> {
    if depth > 5 {
        return None;
    }
    let options: Vec<&ORule> = rules.iter().filter(|r| &r.parent == label).collect();
    let implicit = label.int_range.map(|(lo, hi)| rng.gen_range(lo..=hi));
    if options.is_empty() || (implicit.is_some() && rng.gen_bool(0.3)) {
        return implicit.map(|n| vec![n.to_string()]);
    }
    let r = options.choose(rng)?;
    let mut out = Vec::new();
    for sym in &r.source {
        match sym {
            OSrc::Lit(l) if rng.gen_bool(0.2) => out.push(l.to_uppercase()),
            OSrc::Lit(l) => out.push(l.clone()),
            OSrc::Nt(child, _) => out.extend(sample_yield(rules, child, rng, depth + 1)?),
        }
        if out.len() > 6 {
            return None;
        }
    }
    Some(out)
}

fn parser_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let pool = label_pool();
    let mut discrepancies = Vec::new();
    let (mut cases, mut nonempty, mut total_parses) = (0usize, 0usize, 0usize);
    let mut grammars = 0;
    while grammars < PARSER_GRAMMARS {
        let text = random_grammar_text(&mut rng, &pool);
        let grammar = match load_grammar(&text) {
            Ok(g) => g,
            Err(e) => {
                discrepancies.push(format!("generated grammar rejected: {e}\n{text}"));
                grammars += 1;
                continue;
            }
        };
        grammars += 1;
        let rules = oracle_rules(&text);
        let labels: BTreeSet<NonTerminal> = rules
            .iter()
            .flat_map(|r| {
                std::iter::once(r.parent.clone()).chain(r.source.iter().filter_map(|s| match s {
                    OSrc::Nt(l, _) => Some(l.clone()),
                    OSrc::Lit(_) => None,
                }))
            })
            .collect();
        let int_labels: BTreeSet<NonTerminal> = labels.iter().filter(|l| l.int_range.is_some()).cloned().collect();
        for _ in 0..PARSER_INPUTS_PER_GRAMMAR {
            let starts: Vec<&NonTerminal> = labels.iter().filter(|l| l.category.is_start()).collect();
            let sampled = match starts.choose(&mut rng) {
                Some(root) if rng.gen_bool(0.6) => sample_yield(&rules, root, &mut rng, 0),
                _ => None,
            };
            let words: Vec<String> = sampled.filter(|w| !w.is_empty()).unwrap_or_else(|| {
                let n = rng.gen_range(1..=6);
                (0..n).map(|_| VOCAB.choose(&mut rng).unwrap().to_string()).collect()
            });
            let input = words.join(" ");
            let tokens = tokenize(&input);
            let texts: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
            cases += 1;

            let cyk: Vec<(String, String)> = match parse(&tokens, &grammar) {
                Ok(ps) => ps.iter().map(render_parse).collect(),
                Err(_) => Vec::new(),
            };
            let cyk_set: BTreeSet<(String, String)> = cyk.iter().cloned().collect();
            if cyk_set.len() != cyk.len() {
                discrepancies.push(format!("duplicate parses for {input:?}\n{text}"));
            }

            let mut oracle = Oracle {
                rules: &rules,
                tokens: &texts,
                int_labels: int_labels.clone(),
                depth_bound: texts.len() * labels.len() + 2,
                max_depth: 0,
            };
            let mut expected = BTreeSet::new();
            for root in labels.iter().filter(|l| l.category.is_start()) {
                expected.extend(oracle.derive(root, 0, texts.len(), &mut Vec::new(), 0));
            }
            if expected != cyk_set {
                let missing: Vec<_> = expected.difference(&cyk_set).take(2).collect();
                let extra: Vec<_> = cyk_set.difference(&expected).take(2).collect();
                discrepancies.push(format!(
                    "input {input:?}: missing {missing:?} extra {extra:?}\n{text}"
                ));
            }
            if !expected.is_empty() {
                nonempty += 1;
            }
            total_parses += expected.len();
        }
    }
    for d in discrepancies.iter().take(3) {
        eprintln!("parser discrepancy: {d}");
    }
    Outcome::new(
        discrepancies.is_empty(),
        format!(
            "{grammars} grammars, {cases} inputs ({nonempty} parseable, {total_parses} tree pairs), {} discrepancies",
            discrepancies.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3

const VALUES: [Option<&str>; 6] = [None, Some("2013"), Some("2013-04-10"), Some("P2D"), Some("p2d"), Some("XXXX-04")];

fn random_spans(rng: &mut StdRng, n: usize, density: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if rng.gen_bool(density) {
            let len = rng.gen_range(1..=3).min(n - i);
            out.push(i..i + len);
            i += len + rng.gen_range(0..2);
        } else {
            i += 1;
        }
    }
    out
}

fn timex(doc: &str, span: Range<usize>, kind: TimexType, value: Option<&str>) -> Timex {
    let chars = span.start * 3..span.end * 3 - 1;
    let t = Timex::new(doc, span, chars, "x", kind).unwrap();
    match value {
        Some(v) => t.with_value(v),
        None => t,
    }
}

fn random_timexes(rng: &mut StdRng, doc: &str, spans: Vec<Range<usize>>) -> Vec<Timex> {
    spans
        .into_iter()
        .map(|s| {
            let kind = *TimexType::ALL.choose(rng).unwrap();
            timex(doc, s, kind, *VALUES.choose(rng).unwrap())
        })
        .collect()
}

/// Predictions derived from gold by shifting, trimming and dropping, plus noise.
fn perturbed(rng: &mut StdRng, doc: &str, gold: &[Timex], n: usize) -> Vec<Timex> {
    let mut spans: Vec<Range<usize>> = Vec::new();
    for g in gold {
        match rng.gen_range(0..5) {
            0 => {}
            1 => spans.push(g.span.clone()),
            2 => spans.push(g.span.start..(g.span.start + 1)),
            3 => spans.push(g.span.start.saturating_sub(1)..g.span.end),
            _ => spans.push(g.span.start..(g.span.end + 1).min(n)),
        }
    }
    spans.extend(random_spans(rng, n, 0.1));
    spans.sort_by_key(|s| (s.start, s.end));
    let mut kept: Vec<Range<usize>> = Vec::new();
    for s in spans {
        if kept.last().is_none_or(|k| k.end <= s.start) {
            kept.push(s);
        }
    }
    let mut out = random_timexes(rng, doc, kept);
    // copy gold attributes onto some predictions so matches are often correct
    for p in &mut out {
        if let Some(g) = gold.iter().find(|g| g.overlaps(p)) {
            if rng.gen_bool(0.6) {
                p.kind = g.kind;
                p.value = g.value.clone();
            }
        }
    }
    out
}

#[derive(Default)]
struct OracleCounts {
    gold: usize,
    pred: usize,
    strict: usize,
    relaxed: usize,
    typed: usize,
    valued: usize,
}

fn oracle_count(gold: &[Timex], pred: &[Timex], c: &mut OracleCounts) {
    c.gold += gold.len();
    c.pred += pred.len();
    let tokens = |t: &Timex| -> BTreeSet<usize> { t.span.clone().collect() };
    let mut preds: Vec<&Timex> = pred.iter().collect();
    preds.sort_by_key(|p| p.span.start);
    let mut golds: Vec<&Timex> = gold.iter().collect();
    golds.sort_by_key(|g| g.span.start);
    let mut used = vec![false; golds.len()];
    for p in preds {
        let pt = tokens(p);
        let Some(gi) = (0..golds.len()).find(|&gi| !used[gi] && !tokens(golds[gi]).is_disjoint(&pt)) else {
            continue;
        };
        used[gi] = true;
        let g = golds[gi];
        c.relaxed += 1;
        if tokens(g) == pt {
            c.strict += 1;
        }
        if g.kind == p.kind {
            c.typed += 1;
        }
        if let (Some(a), Some(b)) = (&g.value, &p.value) {
            if a.to_lowercase() == b.to_lowercase() {
                c.valued += 1;
            }
        }
    }
}

fn oracle_metrics(c: &OracleCounts) -> [f64; 10] {
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let f = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    let (sp, sr) = (div(c.strict, c.pred), div(c.strict, c.gold));
    let (rp, rr) = (div(c.relaxed, c.pred), div(c.relaxed, c.gold));
    let vshare = div(c.valued, c.relaxed);
    let (vp, vr) = (rp * vshare, rr * vshare);
    [
        100.0 * sp,
        100.0 * sr,
        100.0 * f(sp, sr),
        100.0 * rp,
        100.0 * rr,
        100.0 * f(rp, rr),
        100.0 * f(rp, rr) * div(c.typed, c.relaxed),
        100.0 * vp,
        100.0 * vr,
        100.0 * f(vp, vr),
    ]
}

fn metric_vector(m: &timex_core::Metrics) -> [f64; 10] {
    [
        m.strict_p,
        m.strict_r,
        m.strict_f1,
        m.relaxed_p,
        m.relaxed_r,
        m.relaxed_f1,
        m.type_f1,
        m.value_p,
        m.value_r,
        m.value_f1,
    ]
}

fn metric_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let mut problems = Vec::new();

    // hand-counted fixture: 3 gold, 2 pred, 2 relaxed, 1 strict, 1 value-correct
    let gold = vec![
        timex("f", 0..2, TimexType::Date, Some("2013-04-10")),
        timex("f", 3..5, TimexType::Date, Some("2013")),
        timex("f", 6..7, TimexType::Date, Some("P2D")),
    ];
    let pred = vec![
        timex("f", 0..2, TimexType::Date, Some("2013-04-10")),
        timex("f", 4..5, TimexType::Date, Some("2014")),
    ];
    let (m, _) = score(&[DocumentPair {
        doc_id: "f",
        gold: &gold,
        pred: &pred,
    }])
    .unwrap();
    let two = |x: f64| format!("{x:.2}");
    if (two(m.relaxed_f1), two(m.value_f1), two(m.strict_f1)) != ("80.00".into(), "40.00".into(), "40.00".into()) {
        problems.push(format!("fixture gave Rel F1 {:.2}, VF1 {:.2}", m.relaxed_f1, m.value_f1));
    }

    for corpus in 0..METRIC_CORPORA {
        let ndocs = rng.gen_range(1..=4);
        let mut docs = Vec::new();
        for d in 0..ndocs {
            let id = format!("c{corpus}d{d}");
            let n = rng.gen_range(0..=20);
            let gold = {
                let spans = random_spans(&mut rng, n, 0.3);
                random_timexes(&mut rng, &id, spans)
            };
            let pred = perturbed(&mut rng, &id, &gold, n);
            docs.push((id, gold, pred));
        }
        let pairs: Vec<DocumentPair> = docs
            .iter()
            .map(|(id, g, p)| DocumentPair {
                doc_id: id,
                gold: g,
                pred: p,
            })
            .collect();
        let (m, _) = match score(&pairs) {
            Ok(x) => x,
            Err(e) => {
                problems.push(format!("corpus {corpus}: {e}"));
                continue;
            }
        };
        let mut c = OracleCounts::default();
        for (_, g, p) in &docs {
            oracle_count(g, p, &mut c);
        }
        let want = oracle_metrics(&c);
        let got = metric_vector(&m);
        if got.iter().zip(want).any(|(a, b)| (a - b).abs() > METRIC_TOLERANCE) {
            problems.push(format!("corpus {corpus}: got {got:?}, oracle {want:?}"));
        }
        let vshare = if c.relaxed == 0 { 0.0 } else { c.valued as f64 / c.relaxed as f64 };
        if (m.value_f1 - m.relaxed_f1 * vshare).abs() > METRIC_TOLERANCE {
            problems.push(format!("corpus {corpus}: value F1 identity"));
        }
        if m.strict_f1 > m.relaxed_f1 + METRIC_TOLERANCE || m.type_f1 > m.relaxed_f1 + METRIC_TOLERANCE {
            problems.push(format!("corpus {corpus}: strict or type F1 above relaxed F1"));
        }

        // order of documents and of timexes does not matter
        let mut shuffled: Vec<(String, Vec<Timex>, Vec<Timex>)> = docs.clone();
        shuffled.shuffle(&mut rng);
        for (_, g, p) in &mut shuffled {
            g.shuffle(&mut rng);
            p.shuffle(&mut rng);
        }
        let pairs: Vec<DocumentPair> = shuffled
            .iter()
            .map(|(id, g, p)| DocumentPair {
                doc_id: id,
                gold: g,
                pred: p,
            })
            .collect();
        let (m2, _) = score(&pairs).unwrap();
        if metric_vector(&m2) != got {
            problems.push(format!("corpus {corpus}: order-dependent scores"));
        }
    }
    for p in problems.iter().take(3) {
        eprintln!("metric problem: {p}");
    }
    Outcome::new(
        problems.is_empty(),
        format!(
            "fixture Rel F1 {:.2} / VF1 {:.2}; {METRIC_CORPORA} corpora, {} violations",
            m.relaxed_f1,
            m.value_f1,
            problems.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 4

const TIMEX_PHRASES: [(&str, TimexType, &str); 9] = [
    ("dos días", TimexType::Duration, "P2D"),
    ("ayer", TimexType::Date, "2013-04-09"),
    ("6 de marzo", TimexType::Date, "2013-03-06"),
    ("marzo de 2002", TimexType::Date, "2002-03"),
    ("hace dos días", TimexType::Date, "2013-04-08"),
    ("esta tarde", TimexType::Time, "2013-04-10TAF"),
    ("un momento dado de la historia", TimexType::Date, "XXXX"),
    ("primavera", TimexType::Date, "2013-SP"),
    ("unos días", TimexType::Duration, "PXD"),
];
const FILLER: [&str; 8] = ["el", "ministro", "dijo", "que", "la", "reunión", "terminó", "."];

fn monotonicity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let detect_focused = Pipeline::bundled(Language::Es, Mode::DetectionFocused);
    let norm_focused = Pipeline::bundled(Language::Es, Mode::NormalizationFocused);
    let mut problems = Vec::new();
    let (mut total_d, mut total_n) = (0usize, 0usize);
    let (mut sum_rd, mut sum_rn) = (0.0, 0.0);
    for corpus in 0..MONOTONICITY_CORPORA {
        let mut gold_docs = Vec::new();
        for d in 0..rng.gen_range(1..=3) {
            let mut tokens: Vec<String> = Vec::new();
            let mut entities = Vec::new();
            for _ in 0..rng.gen_range(1..=5) {
                for _ in 0..rng.gen_range(1..=3) {
                    tokens.push(FILLER.choose(&mut rng).unwrap().to_string());
                }
                let (phrase, kind, value) = TIMEX_PHRASES.choose(&mut rng).unwrap();
                let start = tokens.len();
                tokens.extend(phrase.split(' ').map(String::from));
                entities.push(Entity {
                    span: start..tokens.len(),
                    kind: *kind,
                    value: Some(value.to_string()),
                });
            }
            tokens.push(".".into());
            gold_docs.push(TabulatedDocument::from_entities(format!("m{corpus}-{d}"), anchor(), tokens, &entities));
        }
        let mut outputs = Vec::new();
        for pipeline in [&detect_focused, &norm_focused] {
            let docs: Vec<TabulatedDocument> = gold_docs
                .iter()
                .map(|g| pipeline.process(g).map(|(d, _)| d).expect("document processes"))
                .collect();
            outputs.push(docs);
        }
        let timexes = |docs: &[TabulatedDocument]| -> Vec<Vec<Timex>> { docs.iter().map(|d| d.timexes()).collect() };
        let gold = timexes(&gold_docs);
        let (pd, pn) = (timexes(&outputs[0]), timexes(&outputs[1]));
        let recall = |pred: &[Vec<Timex>]| {
            let pairs: Vec<DocumentPair> = gold
                .iter()
                .zip(pred)
                .zip(&gold_docs)
                .map(|((g, p), doc)| DocumentPair {
                    doc_id: &doc.doc_id,
                    gold: g,
                    pred: p,
                })
                .collect();
            score(&pairs).unwrap().0.relaxed_r
        };
        let (rd, rn) = (recall(&pd), recall(&pn));
        sum_rd += rd;
        sum_rn += rn;
        if rn > rd {
            problems.push(format!("corpus {corpus}: recall {rn} > {rd}"));
        }
        for (d, n) in pd.iter().zip(&pn) {
            total_d += d.len();
            total_n += n.len();
            let dspans: HashSet<Range<usize>> = d.iter().map(|t| t.span.clone()).collect();
            if n.iter().any(|t| !dspans.contains(&t.span)) {
                problems.push(format!("corpus {corpus}: normalization-focused span not in detection-focused output"));
            }
        }
    }
    let k = MONOTONICITY_CORPORA as f64;
    Outcome::new(
        problems.is_empty() && total_n < total_d,
        format!(
            "{MONOTONICITY_CORPORA} corpora; mean Rel R xtn-d {:.2} vs xtn-n {:.2}; {total_d} vs {total_n} predictions; {} violations",
            sum_rd / k,
            sum_rn / k,
            problems.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 5

fn date_fields(d: NaiveDate, pick: &[CalendarField]) -> FieldMap {
    let mut m = FieldMap::new();
    for f in pick {
        let v = match f {
            CalendarField::Year => i64::from(d.year()),
            CalendarField::MonthOfYear => i64::from(d.month()),
            CalendarField::DayOfMonth => i64::from(d.day()),
            CalendarField::DayOfWeek => i64::from(d.weekday().number_from_monday()),
            _ => unreachable!(),
        };
        m.insert(*f, FieldValue::Int(v)).unwrap();
    }
    m
}

fn day_matches(d: NaiveDate, fields: &FieldMap) -> bool {
    fields.iter().all(|(f, v)| {
        let FieldValue::Int(v) = v else { return false };
        match f {
            CalendarField::Year => i64::from(d.year()) == v,
            CalendarField::MonthOfYear => i64::from(d.month()) == v,
            CalendarField::DayOfMonth => i64::from(d.day()) == v,
            CalendarField::DayOfWeek => i64::from(d.weekday().number_from_monday()) == v,
            CalendarField::HourOfDay => true,
            _ => false,
        }
    })
}

fn midnight(d: NaiveDate) -> NaiveDateTime {
    d.and_time(NaiveTime::MIN)
}

/// Nearest granule of the finest constrained unit lying entirely before or
/// after `reference`, found by walking years, months, days or hours one at a
/// time. `None` when nothing matches within 400 years.
fn nearest_granule(reference: Interval, fields: &FieldMap, hour: Option<i64>, dir: Direction) -> Option<Interval> {
    let year = match fields.get(CalendarField::Year) {
        Some(FieldValue::Int(y)) => Some(y),
        _ => None,
    };
    let has = |f| fields.get(f).is_some();
    let step = |d: NaiveDate| match dir {
        Direction::Earlier => d.pred_opt(),
        Direction::Later => d.succ_opt(),
    };
    let outside = |g: &Interval| match dir {
        Direction::Earlier => g.end <= reference.start,
        Direction::Later => g.start >= reference.end,
    };
    let past_year = |y: i32| match (year, dir) {
        (Some(want), Direction::Earlier) => i64::from(y) < want,
        (Some(want), Direction::Later) => i64::from(y) > want,
        _ => false,
    };
    let origin = reference.start.date();
    let limit = 400 * 366 + 31;
    if hour.is_some() || has(CalendarField::DayOfMonth) || has(CalendarField::DayOfWeek) {
        // start one day inside the reference so granules overlapping it are seen
        let mut d = match dir {
            Direction::Earlier => origin.succ_opt()?,
            Direction::Later => origin.pred_opt()?,
        };
        for _ in 0..limit {
            d = step(d)?;
            if past_year(d.year()) {
                return None;
            }
            if !day_matches(d, fields) {
                continue;
            }
            let hours: Vec<i64> = match hour {
                Some(h) => vec![h],
                None => vec![-1],
            };
            for h in hours {
                let g = if h < 0 {
                    Interval { start: midnight(d), end: midnight(d) + Duration::days(1) }
                } else {
                    let start = midnight(d) + Duration::hours(h);
                    Interval { start, end: start + Duration::hours(1) }
                };
                if outside(&g) {
                    return Some(g);
                }
            }
        }
        return None;
    }
    let months = has(CalendarField::MonthOfYear);
    let (mut y, mut m) = (origin.year(), if months { origin.month() } else { 1 });
    // as above, begin one granule inside the reference
    let advance = |y: i32, m: u32, forward: bool| -> (i32, u32) {
        match (months, forward) {
            (true, true) if m == 12 => (y + 1, 1),
            (true, true) => (y, m + 1),
            (true, false) if m == 1 => (y - 1, 12),
            (true, false) => (y, m - 1),
            (false, true) => (y + 1, 1),
            (false, false) => (y - 1, 1),
        }
    };
    let forward = dir == Direction::Later;
    (y, m) = advance(y, m, !forward);
    for _ in 0..400 * 12 + 2 {
        (y, m) = advance(y, m, forward);
        if past_year(y) {
            return None;
        }
        let start = NaiveDate::from_ymd_opt(y, m, 1)?;
        let (ny, nm) = advance(y, m, true);
        let g = Interval { start: midnight(start), end: midnight(NaiveDate::from_ymd_opt(ny, nm, 1)?) };
        if day_matches(start, fields) && outside(&g) {
            return Some(g);
        }
    }
    None
}

fn target(label: Category, children: Vec<TargetNode>) -> TargetTree {
    TargetTree {
        id: 0,
        label: NonTerminal::new(label),
        children,
    }
}

fn op(name: &str) -> TargetNode {
    TargetNode::Operator(name.to_string())
}

fn move_tree(outer: &str, inner: &str, period: &[(i64, &str)]) -> TargetTree {
    let period_tree = || {
        let simple = |n: i64, u: &str| vec![op("Simple"), TargetNode::Int(n), op(u)];
        let mut kids = Vec::new();
        for (i, (n, u)) in period.iter().enumerate() {
            if i + 1 < period.len() {
                kids.push(op("Sum"));
            }
            kids.extend(simple(*n, u));
        }
        TargetNode::Tree(target(Category::Period, kids))
    };
    let inner_tree = TargetNode::Tree(target(Category::TimeSpan, vec![op(inner), op("Present"), period_tree()]));
    target(Category::TimeSpan, vec![op(outer), inner_tree, period_tree()])
}

fn operator_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let table = PartOfDayTable::default();
    let mut violations = Vec::new();
    let mut brute_checked = 0;
    let field_choices = [
        CalendarField::Year,
        CalendarField::MonthOfYear,
        CalendarField::DayOfMonth,
        CalendarField::DayOfWeek,
    ];
    let base = NaiveDate::from_ymd_opt(1950, 1, 1).unwrap();
    for case in 0..OPERATOR_PAIRS {
        let anchor_day = base + Duration::days(rng.gen_range(0..40_000));
        let anchor_at = midnight(anchor_day) + Duration::minutes(rng.gen_range(0..24 * 60));
        let real = anchor_day + Duration::days(rng.gen_range(-9_000..9_000));
        let pick: Vec<CalendarField> = loop {
            let p: Vec<CalendarField> = field_choices.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if !p.is_empty() {
                break p;
            }
        };
        let mut fields = date_fields(real, &pick);
        let hour = rng.gen_bool(0.2).then(|| rng.gen_range(0..24));
        if let Some(h) = hour {
            fields.insert(CalendarField::HourOfDay, FieldValue::Int(h)).unwrap();
        }
        let reference = granule_containing(anchor_at, SpanUnit::Day, &table).unwrap();

        for dir in [Direction::Earlier, Direction::Later] {
            brute_checked += 1;
            let want = nearest_granule(reference, &fields, hour, dir);
            let found = match find_matching(reference, &fields, dir, &table) {
                Ok(g) => g,
                Err(CalendarError::HorizonExceeded { .. }) if want.is_none() => continue,
                Err(e) => {
                    violations.push(format!("case {case}: {fields} {dir:?}: {e}, brute force {want:?}"));
                    continue;
                }
            };
            let outside = match dir {
                Direction::Earlier => found.end <= reference.start,
                Direction::Later => found.start >= reference.end,
            };
            if !outside {
                violations.push(format!("case {case}: {fields} {dir:?} gave {found:?} against {reference:?}"));
            }
            if !day_matches(found.start.date(), &fields) || hour.is_some_and(|h| i64::from(found.start.hour()) != h) {
                violations.push(format!("case {case}: {found:?} does not satisfy {fields}"));
            }
            if want != Some(found) {
                violations.push(format!("case {case}: {fields} {dir:?} gave {found:?}, brute force {want:?}"));
            }
        }

        // containment in the enclosing granule
        let units = [
            SpanUnit::Century,
            SpanUnit::Decade,
            SpanUnit::Year,
            SpanUnit::Season,
            SpanUnit::Quarter,
            SpanUnit::Month,
            SpanUnit::Week,
            SpanUnit::Day,
            SpanUnit::Hour,
            SpanUnit::Minute,
        ];
        let unit = *units.choose(&mut rng).unwrap();
        let g = granule_containing(anchor_at, unit, &table).unwrap();
        let aligned = match unit {
            SpanUnit::Year => g.start.date().ordinal() == 1,
            SpanUnit::Month => g.start.date().day() == 1,
            SpanUnit::Week => g.start.date().weekday().number_from_monday() == 1,
            SpanUnit::Day => g.start.time() == NaiveTime::MIN,
            _ => true,
        };
        if !g.contains(anchor_at) || granule_end(g.start, unit) != Ok(g.end) || !aligned {
            violations.push(format!("case {case}: {unit:?} granule {g:?} around {anchor_at}"));
        }
        let ev = Evaluator::default();
        let tree = target(
            Category::TimeSpan,
            vec![
                op("FindEnclosing"),
                op("Present"),
                op(["Years", "Months", "Weeks", "Days"][case % 4]),
            ],
        );
        let here = Anchor::from_date(anchor_day);
        match ev.evaluate(&tree, here) {
            Ok(TemporalObject::Span(s)) if s.interval().contains(midnight(anchor_day)) => {}
            other => violations.push(format!("case {case}: FindEnclosing gave {other:?}")),
        }

        // moving back and forth by a month-free period is the identity
        let units = ["Weeks", "Days", "Hours", "Minutes"];
        let period: Vec<(i64, &str)> = (0..rng.gen_range(1..=2))
            .map(|_| (rng.gen_range(0..500), *units.choose(&mut rng).unwrap()))
            .collect();
        let present = ev.evaluate(&target(Category::TimeSpan, vec![op("Present")]), here).unwrap();
        for (outer, inner) in [("MoveLater", "MoveEarlier"), ("MoveEarlier", "MoveLater")] {
            match ev.evaluate(&move_tree(outer, inner, &period), here) {
                Ok(TemporalObject::Span(s)) => {
                    let TemporalObject::Span(p) = &present else { unreachable!() };
                    if s.interval() != p.interval() {
                        violations.push(format!("case {case}: {outer}({inner}(Present, {period:?})) = {s:?}"));
                    }
                }
                other => violations.push(format!("case {case}: move gave {other:?}")),
            }
        }
    }

    // impossible dates exhaust the search horizon
    let reference = granule_containing(midnight(anchor().date), SpanUnit::Day, &table).unwrap();
    let mut horizon_errors = 0;
    for (m, d) in [(2, 30), (2, 31), (4, 31), (11, 31)] {
        let mut fields = FieldMap::new();
        fields.insert(CalendarField::MonthOfYear, FieldValue::Int(m)).unwrap();
        fields.insert(CalendarField::DayOfMonth, FieldValue::Int(d)).unwrap();
        for dir in [Direction::Earlier, Direction::Later] {
            match find_matching(reference, &fields, dir, &table) {
                Err(CalendarError::HorizonExceeded { .. }) => horizon_errors += 1,
                other => violations.push(format!("{fields} {dir:?}: expected horizon error, got {other:?}")),
            }
        }
    }
    for v in violations.iter().take(3) {
        eprintln!("operator violation: {v}");
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "{OPERATOR_PAIRS} field-map/anchor pairs ({brute_checked} searches checked by brute force), {horizon_errors}/8 horizon errors, {} violations",
            violations.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6

const TOKEN_CHARS: &[char] = &['a', 'z', 'Z', 'ñ', 'í', '0', '9', '-', '/', '.', ',', '#', '(', '"', '\''];

fn random_token(rng: &mut StdRng) -> String {
    let len = rng.gen_range(1..=6);
    (0..len).map(|_| *TOKEN_CHARS.choose(rng).unwrap()).collect()
}

fn random_document(rng: &mut StdRng, i: usize) -> TabulatedDocument {
    let n = rng.gen_range(0..=15);
    let tokens: Vec<String> = (0..n).map(|_| random_token(rng)).collect();
    let entities: Vec<Entity> = random_spans(rng, n, 0.3)
        .into_iter()
        .map(|span| Entity {
            span,
            kind: *TimexType::ALL.choose(rng).unwrap(),
            value: match rng.gen_range(0..4) {
                0 => None,
                1 => Some("2013-04-10".into()),
                2 => Some(format!("P{}D", rng.gen_range(1..99))),
                _ => Some("XXXX-WXX-1TNI".into()),
            },
        })
        .collect();
    let date = NaiveDate::from_ymd_opt(1900, 1, 1).unwrap() + Duration::days(rng.gen_range(0..80_000));
    let mut anchor = Anchor::from_date(date);
    if rng.gen_bool(0.4) {
        anchor = anchor.with_time(NaiveTime::from_hms_opt(rng.gen_range(0..24), rng.gen_range(0..60), rng.gen_range(0..60)).unwrap());
    }
    let mut doc = TabulatedDocument::from_entities(format!("doc-{i}_{}", rng.gen_range(0..1000)), anchor, tokens, &entities);
    doc.lang = [None, Some("es"), Some("en")].choose(rng).unwrap().map(String::from);
    doc
}

fn random_config_lines(rng: &mut StdRng) -> Vec<String> {
    let mut lines = Vec::new();
    if rng.gen_bool(0.5) {
        lines.push(format!("#! lang {}", ["es", "en"].choose(rng).unwrap()));
    }
    for part in PartOfDay::ALL {
        if rng.gen_bool(0.3) {
            let from = rng.gen_range(0..24);
            let to = rng.gen_range(0..24);
            let mut probe = PartOfDayTable::default();
            if probe.set(part, from, to).is_ok() {
                lines.push(format!("#! part-of-day {} {from}-{to}", part.name()));
            }
        }
    }
    lines
}

fn same_rules(a: &Grammar, b: &Grammar) -> bool {
    a.len() == b.len()
        && a
            .rules()
            .iter()
            .zip(b.rules())
            .all(|(x, y)| x.parent == y.parent && x.source == y.source && x.target == y.target)
}

fn round_trips() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut problems = Vec::new();

    for i in 0..ROUND_TRIPS {
        let docs: Vec<TabulatedDocument> = (0..rng.gen_range(1..=3)).map(|k| random_document(&mut rng, i * 10 + k)).collect();
        let text = write_tabulated(&docs);
        match read_tabulated(&text) {
            Ok(back) if back == docs => {}
            Ok(_) => problems.push(format!("tabulated instance {i} changed:\n{text}")),
            Err(e) => problems.push(format!("tabulated instance {i}: {e}\n{text}")),
        }
    }

    let pool = label_pool();
    for i in 0..ROUND_TRIPS {
        let mut lines = random_config_lines(&mut rng);
        lines.push(random_grammar_text(&mut rng, &pool));
        if rng.gen_bool(0.3) {
            lines.push("# a comment".into());
        }
        let text = lines.join("\n");
        let first = match load_grammar(&text) {
            Ok(g) => g,
            Err(e) => {
                problems.push(format!("grammar instance {i} rejected: {e}\n{text}"));
                continue;
            }
        };
        let serialized = first.serialize();
        match load_grammar(&serialized) {
            Ok(second) => {
                if !same_rules(&first, &second)
                    || second.config != first.config
                    || second.serialize() != serialized
                {
                    problems.push(format!("grammar instance {i} changed:\n{text}\n--\n{serialized}"));
                }
            }
            Err(e) => problems.push(format!("grammar instance {i} reload: {e}\n{serialized}")),
        }
    }
    for p in problems.iter().take(3) {
        eprintln!("round-trip problem: {p}");
    }
    Outcome::new(
        problems.is_empty(),
        format!("{ROUND_TRIPS} tabulated + {ROUND_TRIPS} grammar instances, {} violations", problems.len()),
    )
}

// ---------------------------------------------------------------------------
// 7

const PERF_PHRASES: [&str; 12] = [
    "dos días",
    "6 de marzo",
    "el 6 de marzo de 2002",
    "hace dos días",
    "ayer",
    "el año pasado",
    "un día de 2002",
    "esta tarde",
    "dentro de tres semanas",
    "los años 90",
    "el lunes pasado",
    "un momento dado de la historia",
];

fn performance() -> Outcome {
    let grammar = Language::Es.grammar();
    let rules = grammar.len();
    let normalizer = Normalizer::new(grammar);
    let mut samples: Vec<StdDuration> = Vec::new();
    for _ in 0..20 {
        for p in PERF_PHRASES {
            let t = Instant::now();
            let _ = normalizer.normalize(p, anchor());
            samples.push(t.elapsed());
        }
    }
    samples.sort();
    let median = samples[samples.len() / 2];

    let started = Instant::now();
    let mut ok = 0;
    for i in 0..BATCH_SIZE {
        if normalizer.normalize(PERF_PHRASES[i % PERF_PHRASES.len()], anchor()).is_ok() {
            ok += 1;
        }
    }
    let batch = started.elapsed();
    Outcome::new(
        rules >= 200 && median <= MEDIAN_LATENCY_BUDGET && batch <= BATCH_BUDGET,
        format!("{rules} rules; median {median:?}; {BATCH_SIZE} timexes in {batch:?} ({ok} normalized)"),
    )
}
