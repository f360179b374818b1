//! Detection and normalization scoring in the TempEval-3 style, and an
//! error report that assigns each discrepancy one category.

use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::TabulatedDocument;
use crate::timex::{Timex, TimexType};
use crate::value::{classify_value, values_equivalent};

/// A gold/pred pairing within one document. Indices refer to the input lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Pair {
    pub gold: usize,
    pub pred: usize,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MatchSet {
    /// Relaxed matches; strict ones are flagged.
    pub pairs: Vec<Pair>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

impl MatchSet {
    pub fn strict(&self) -> impl Iterator<Item = &Pair> {
        self.pairs.iter().filter(|p| p.strict)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("{side} timexes {a:?} and {b:?} overlap")]
    Overlap {
        side: &'static str,
        a: Range<usize>,
        b: Range<usize>,
    },
}

fn check_disjoint(side: &'static str, xs: &[Timex]) -> Result<(), MatchError> {
    let mut spans: Vec<&Range<usize>> = xs.iter().map(|t| &t.span).collect();
    spans.sort_by_key(|r| r.start);
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(MatchError::Overlap {
                side,
                a: w[0].clone(),
                b: w[1].clone(),
            });
        }
    }
    Ok(())
}

/// Greedy one-to-one matching. Predictions are visited left to right and
/// each pairs with the leftmost unmatched gold it overlaps.
pub fn match_timexes(gold: &[Timex], pred: &[Timex]) -> Result<MatchSet, MatchError> {
    check_disjoint("gold", gold)?;
    check_disjoint("predicted", pred)?;
    let mut pred_order: Vec<usize> = (0..pred.len()).collect();
    pred_order.sort_by_key(|&i| pred[i].span.start);
    let mut gold_order: Vec<usize> = (0..gold.len()).collect();
    gold_order.sort_by_key(|&i| gold[i].span.start);

    let mut gold_used = vec![false; gold.len()];
    let mut out = MatchSet::default();
    for p in pred_order {
        let hit = gold_order
            .iter()
            .copied()
            .find(|&g| !gold_used[g] && gold[g].overlaps(&pred[p]));
        match hit {
            Some(g) => {
                gold_used[g] = true;
                out.pairs.push(Pair {
                    gold: g,
                    pred: p,
                    strict: gold[g].span == pred[p].span,
                });
            }
            None => out.unmatched_pred.push(p),
        }
    }
    out.unmatched_gold = gold_order.into_iter().filter(|&g| !gold_used[g]).collect();
    out.unmatched_pred.sort_unstable();
    Ok(out)
}

fn same_value(a: Option<&str>, b: Option<&str>) -> bool {
    matches!((a, b), (Some(a), Some(b)) if a.eq_ignore_ascii_case(b))
}

/// Corpus-level counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub gold: usize,
    pub pred: usize,
    pub strict: usize,
    pub relaxed: usize,
    pub type_correct: usize,
    pub value_correct: usize,
    /// Strict matches with a correct value; used for gold accuracy.
    pub strict_value_correct: usize,
    /// Gold timexes that carry a value.
    pub gold_with_value: usize,
}

impl Counts {
    pub fn add_document(&mut self, gold: &[Timex], pred: &[Timex], m: &MatchSet) {
        self.gold += gold.len();
        self.pred += pred.len();
        self.gold_with_value += gold.iter().filter(|t| t.value.is_some()).count();
        for p in &m.pairs {
            let (g, q) = (&gold[p.gold], &pred[p.pred]);
            let value_ok = same_value(g.value.as_deref(), q.value.as_deref());
            self.relaxed += 1;
            self.strict += usize::from(p.strict);
            self.type_correct += usize::from(g.kind == q.kind);
            self.value_correct += usize::from(value_ok);
            self.strict_value_correct += usize::from(value_ok && p.strict);
        }
    }
}

/// All figures are percentages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Metrics {
    pub strict_p: f64,
    pub strict_r: f64,
    pub strict_f1: f64,
    pub relaxed_p: f64,
    pub relaxed_r: f64,
    pub relaxed_f1: f64,
    pub type_f1: f64,
    pub value_p: f64,
    pub value_r: f64,
    pub value_f1: f64,
    /// Share of valued gold timexes predicted with exactly their span and value.
    pub gold_accuracy: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl Metrics {
    pub fn from_counts(c: &Counts) -> Metrics {
        let strict_p = ratio(c.strict, c.pred);
        let strict_r = ratio(c.strict, c.gold);
        let relaxed_p = ratio(c.relaxed, c.pred);
        let relaxed_r = ratio(c.relaxed, c.gold);
        let relaxed_f1 = harmonic(relaxed_p, relaxed_r);
        let type_share = ratio(c.type_correct, c.relaxed);
        let value_share = ratio(c.value_correct, c.relaxed);
        let value_p = relaxed_p * value_share;
        let value_r = relaxed_r * value_share;
        Metrics {
            strict_p: 100.0 * strict_p,
            strict_r: 100.0 * strict_r,
            strict_f1: 100.0 * harmonic(strict_p, strict_r),
            relaxed_p: 100.0 * relaxed_p,
            relaxed_r: 100.0 * relaxed_r,
            relaxed_f1: 100.0 * relaxed_f1,
            type_f1: 100.0 * relaxed_f1 * type_share,
            value_p: 100.0 * value_p,
            value_r: 100.0 * value_r,
            value_f1: 100.0 * harmonic(value_p, value_r),
            gold_accuracy: 100.0 * ratio(c.strict_value_correct, c.gold_with_value),
        }
    }
}

/// One document's gold and predicted timexes.
pub struct DocumentPair<'a> {
    pub doc_id: &'a str,
    pub gold: &'a [Timex],
    pub pred: &'a [Timex],
}

/// Micro-averaged metrics over documents.
pub fn score(docs: &[DocumentPair<'_>]) -> Result<(Metrics, Counts), MatchError> {
    let mut counts = Counts::default();
    for d in docs {
        let m = match_timexes(d.gold, d.pred)?;
        counts.add_document(d.gold, d.pred, &m);
    }
    Ok((Metrics::from_counts(&counts), counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    FalsePositive,
    FalseNegative,
    WrongSpan,
    WrongType,
    LackOfRules,
    EquivalentValue,
    WrongValueClass,
    WrongUnderspecified,
    WrongDisambiguation,
    /// Value mismatches not explained by the categories above, including
    /// those that need document context to resolve.
    Other,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 10] = [
        ErrorCategory::FalsePositive,
        ErrorCategory::FalseNegative,
        ErrorCategory::WrongSpan,
        ErrorCategory::WrongType,
        ErrorCategory::LackOfRules,
        ErrorCategory::EquivalentValue,
        ErrorCategory::WrongValueClass,
        ErrorCategory::WrongUnderspecified,
        ErrorCategory::WrongDisambiguation,
        ErrorCategory::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::FalsePositive => "false positive",
            ErrorCategory::FalseNegative => "not detected",
            ErrorCategory::WrongSpan => "wrong span",
            ErrorCategory::WrongType => "wrong type",
            ErrorCategory::LackOfRules => "lack of rules",
            ErrorCategory::EquivalentValue => "equivalent value",
            ErrorCategory::WrongValueClass => "wrong value class",
            ErrorCategory::WrongUnderspecified => "wrong underspecified time span",
            ErrorCategory::WrongDisambiguation => "wrong temporal disambiguation",
            ErrorCategory::Other => "other",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Category of a value mismatch between a gold and a predicted value.
pub fn value_error(gold: Option<&str>, pred: Option<&str>) -> Option<ErrorCategory> {
    if same_value(gold, pred) {
        return None;
    }
    let (Some(g), Some(p)) = (gold, pred) else {
        return Some(if pred.is_none() {
            ErrorCategory::LackOfRules
        } else {
            ErrorCategory::Other
        });
    };
    if values_equivalent(g, p) {
        return Some(ErrorCategory::EquivalentValue);
    }
    let (cg, cp) = (classify_value(g), classify_value(p));
    Some(if cg.shape != cp.shape {
        ErrorCategory::WrongValueClass
    } else if cg.underspecified != cp.underspecified {
        ErrorCategory::WrongUnderspecified
    } else if cg.granularity == cp.granularity && !cg.underspecified {
        ErrorCategory::WrongDisambiguation
    } else {
        ErrorCategory::Other
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorInstance {
    pub doc_id: String,
    pub category: ErrorCategory,
    pub gold_span: Option<Range<usize>>,
    pub pred_span: Option<Range<usize>>,
    pub gold_text: Option<String>,
    pub pred_text: Option<String>,
    pub gold_type: Option<TimexType>,
    pub pred_type: Option<TimexType>,
    pub gold_value: Option<String>,
    pub pred_value: Option<String>,
}

/// Every unmatched timex and every imperfect pair, one category each.
/// Perfect pairs are not listed.
pub fn error_report(doc_id: &str, gold: &[Timex], pred: &[Timex], m: &MatchSet) -> Vec<ErrorInstance> {
    let instance = |category, g: Option<&Timex>, p: Option<&Timex>| ErrorInstance {
        doc_id: doc_id.to_string(),
        category,
        gold_span: g.map(|t| t.span.clone()),
        pred_span: p.map(|t| t.span.clone()),
        gold_text: g.map(|t| t.text.clone()),
        pred_text: p.map(|t| t.text.clone()),
        gold_type: g.map(|t| t.kind),
        pred_type: p.map(|t| t.kind),
        gold_value: g.and_then(|t| t.value.clone()),
        pred_value: p.and_then(|t| t.value.clone()),
    };
    let mut out = Vec::new();
    for &i in &m.unmatched_pred {
        out.push(instance(ErrorCategory::FalsePositive, None, Some(&pred[i])));
    }
    for &i in &m.unmatched_gold {
        out.push(instance(ErrorCategory::FalseNegative, Some(&gold[i]), None));
    }
    for pair in &m.pairs {
        let (g, p) = (&gold[pair.gold], &pred[pair.pred]);
        let category = if !pair.strict {
            Some(ErrorCategory::WrongSpan)
        } else if g.kind != p.kind {
            Some(ErrorCategory::WrongType)
        } else {
            value_error(g.value.as_deref(), p.value.as_deref())
        };
        if let Some(c) = category {
            out.push(instance(c, Some(g), Some(p)));
        }
    }
    out.sort_by_key(|e| {
        (
            e.gold_span.as_ref().or(e.pred_span.as_ref()).map(|r| r.start),
            e.category,
        )
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignmentError {
    #[error("document count differs: {gold} gold, {pred} predicted")]
    DocumentCount { gold: usize, pred: usize },
    #[error("document {index}: gold `{gold}` but predicted `{pred}`")]
    DocumentId { index: usize, gold: String, pred: String },
    #[error("document {doc_id}: token {index} is `{gold}` in gold but `{pred}` in predictions")]
    Token {
        doc_id: String,
        index: usize,
        gold: String,
        pred: String,
    },
    #[error("document {doc_id}: {gold} gold tokens but {pred} predicted")]
    TokenCount { doc_id: String, gold: usize, pred: usize },
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Scores and error list for one evaluation run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metrics: Metrics,
    pub counts: Counts,
    pub errors: Vec<ErrorInstance>,
}

/// Checks that both sides list the same documents and tokens, in order.
pub fn check_alignment(gold: &[TabulatedDocument], pred: &[TabulatedDocument]) -> Result<(), AlignmentError> {
    if gold.len() != pred.len() {
        return Err(AlignmentError::DocumentCount {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.doc_id != p.doc_id {
            return Err(AlignmentError::DocumentId {
                index,
                gold: g.doc_id.clone(),
                pred: p.doc_id.clone(),
            });
        }
        if let Some(i) = g.rows.iter().zip(&p.rows).position(|(a, b)| a.token != b.token) {
            return Err(AlignmentError::Token {
                doc_id: g.doc_id.clone(),
                index: i,
                gold: g.rows[i].token.clone(),
                pred: p.rows[i].token.clone(),
            });
        }
        if g.rows.len() != p.rows.len() {
            return Err(AlignmentError::TokenCount {
                doc_id: g.doc_id.clone(),
                gold: g.rows.len(),
                pred: p.rows.len(),
            });
        }
    }
    Ok(())
}

/// Evaluates aligned tabulated corpora.
pub fn evaluate_tabulated(gold: &[TabulatedDocument], pred: &[TabulatedDocument]) -> Result<Report, AlignmentError> {
    check_alignment(gold, pred)?;
    let mut counts = Counts::default();
    let mut errors = Vec::new();
    for (g, p) in gold.iter().zip(pred) {
        let (gt, pt) = (g.timexes(), p.timexes());
        let m = match_timexes(&gt, &pt)?;
        counts.add_document(&gt, &pt, &m);
        errors.extend(error_report(&g.doc_id, &gt, &pt, &m));
    }
    Ok(Report {
        metrics: Metrics::from_counts(&counts),
        counts,
        errors,
    })
}

impl Report {
    /// Human-readable summary: the relaxed row, the strict row, the gold
    /// accuracy and error counts per category.
    pub fn table(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        out.push_str("Rel P\tRel R\tRel F1\tRel TF1\tRel VP\tRel VR\tRel VF1\n");
        out.push_str(&format!(
            "{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\t{:.2}\n",
            m.relaxed_p, m.relaxed_r, m.relaxed_f1, m.type_f1, m.value_p, m.value_r, m.value_f1
        ));
        out.push_str("Str P\tStr R\tStr F1\n");
        out.push_str(&format!("{:.2}\t{:.2}\t{:.2}\n", m.strict_p, m.strict_r, m.strict_f1));
        if self.counts.gold_with_value > 0 {
            out.push_str(&format!("Gold accuracy\t{:.2}\n", m.gold_accuracy));
        }
        let c = &self.counts;
        out.push_str(&format!(
            "gold {}  pred {}  strict {}  relaxed {}  type ok {}  value ok {}\n",
            c.gold, c.pred, c.strict, c.relaxed, c.type_correct, c.value_correct
        ));
        for cat in ErrorCategory::ALL {
            let n = self.errors.iter().filter(|e| e.category == cat).count();
            if n > 0 {
                out.push_str(&format!("{cat}\t{n}\n"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
