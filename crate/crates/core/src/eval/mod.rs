//! Interpretation of target trees as temporal objects anchored at a
//! document creation time, and their TimeML serialization.

pub mod calendar;
pub mod operators;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};
use thiserror::Error;

use crate::grammar::Category;
use crate::parser::{TargetNode, TargetTree};
use crate::timex::{Anchor, TimexType};
use crate::value::{format_period, Amount, PeriodUnit};

use calendar::{
    add_duration, add_months, find_enclosed, find_matching, granule_containing, granule_end, CalendarError,
    CalendarField, Direction, FieldError, FieldMap, FieldValue, Interval, PartOfDay, PartOfDayTable, Season,
    SpanUnit,
};
use operators::{Op, OperatorSpec};

/// A duration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodObject {
    pub amounts: BTreeMap<PeriodUnit, Amount>,
    /// Recurring period (a SET).
    pub set: bool,
}

impl PeriodObject {
    pub fn new(unit: PeriodUnit, amount: Amount) -> Self {
        PeriodObject {
            amounts: BTreeMap::from([(unit, amount)]),
            set: false,
        }
    }

    /// Unit-wise sum. `None` on overflow.
    pub fn sum(&self, other: &PeriodObject) -> Option<PeriodObject> {
        let mut amounts = self.amounts.clone();
        for (u, a) in &other.amounts {
            let cur = amounts.get(u).copied().unwrap_or(Amount::Count(0));
            amounts.insert(*u, cur.checked_add(*a)?);
        }
        Some(PeriodObject {
            amounts,
            set: self.set || other.set,
        })
    }

    pub fn scale(&self, k: u64) -> Option<PeriodObject> {
        let mut amounts = BTreeMap::new();
        for (u, a) in &self.amounts {
            amounts.insert(*u, a.checked_mul(k)?);
        }
        Some(PeriodObject { amounts, set: self.set })
    }

    /// Splits into a calendar month count and an exact duration.
    fn shift(&self) -> Result<(i64, Duration), EvalError> {
        let mut months = 0i64;
        let mut exact = Duration::zero();
        for (u, a) in &self.amounts {
            let Amount::Count(n) = a else {
                return Err(EvalError::UnspecifiedShift);
            };
            let n = i64::try_from(*n).map_err(|_| EvalError::Overflow)?;
            let per_month = match u {
                PeriodUnit::Century => Some(1200),
                PeriodUnit::Decade => Some(120),
                PeriodUnit::Year => Some(12),
                PeriodUnit::Quarter => Some(3),
                PeriodUnit::Month => Some(1),
                _ => None,
            };
            if let Some(k) = per_month {
                months = n
                    .checked_mul(k)
                    .and_then(|m| months.checked_add(m))
                    .ok_or(EvalError::Overflow)?;
                continue;
            }
            let d = match u {
                PeriodUnit::Week => Duration::try_weeks(n),
                PeriodUnit::Day => Duration::try_days(n),
                PeriodUnit::Hour => Duration::try_hours(n),
                PeriodUnit::Minute => Duration::try_minutes(n),
                _ => Duration::try_seconds(n),
            }
            .ok_or(EvalError::Overflow)?;
            exact = exact.checked_add(&d).ok_or(EvalError::Overflow)?;
        }
        Ok((months, exact))
    }
}

/// An anchored interval. `unit` is the granularity it is reported at;
/// fields in `underspecified` print as `X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeSpanObject {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub unit: SpanUnit,
    pub underspecified: BTreeSet<CalendarField>,
    /// Set for spans built from a period abutting another span; such spans
    /// are reported as their duration.
    pub extent: Option<PeriodObject>,
}

impl TimeSpanObject {
    fn granule(g: Interval, unit: SpanUnit) -> Self {
        TimeSpanObject {
            start: g.start,
            end: g.end,
            unit,
            underspecified: BTreeSet::new(),
            extent: None,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval {
            start: self.start,
            end: self.end,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefDirection {
    Past,
    Present,
    Future,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RefObject {
    pub direction: RefDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TemporalObject {
    Period(PeriodObject),
    Span(TimeSpanObject),
    Ref(RefObject),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Calendar(#[from] CalendarError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{op} expects {expected}")]
    Type { op: String, expected: &'static str },
    #[error("malformed target tree: {0}")]
    Malformed(String),
    #[error("cannot shift a span by an unspecified amount")]
    UnspecifiedShift,
    #[error("Absolute needs a Year field")]
    MissingYear,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("target tree yields no temporal object")]
    Empty,
}

/// Prefix expression read off a target tree.
#[derive(Debug, Clone)]
enum Expr {
    Int(i64),
    Apply(&'static OperatorSpec, Vec<Expr>),
    Fields(Vec<(CalendarField, Expr)>),
}

enum Item<'a> {
    Name(&'a str),
    Int(i64),
    Built(Expr),
}

fn read_expr<'a>(items: &mut std::iter::Peekable<std::vec::IntoIter<Item<'a>>>) -> Result<Expr, EvalError> {
    match items.next() {
        None => Err(EvalError::Malformed("operator is missing arguments".into())),
        Some(Item::Int(n)) => Ok(Expr::Int(n)),
        Some(Item::Built(Expr::Fields(mut fields))) => {
            while starts_fields(items.peek()) {
                if let Expr::Fields(more) = read_expr(items)? {
                    fields.extend(more);
                }
            }
            fields.sort_by_key(|(f, _)| *f);
            Ok(Expr::Fields(fields))
        }
        Some(Item::Built(e)) => Ok(e),
        Some(Item::Name(name)) => {
            let spec = operators::lookup(name).ok_or_else(|| EvalError::Malformed(format!("unknown operator {name}")))?;
            let mut args = Vec::with_capacity(spec.arity);
            for _ in 0..spec.arity {
                args.push(read_expr(items)?);
            }
            if let Op::Field(f) = spec.op {
                let arg = args.pop().expect("field operators are unary");
                let mut fields = vec![(f, arg)];
                // adjacent field expressions form one map
                while starts_fields(items.peek()) {
                    if let Expr::Fields(more) = read_expr(items)? {
                        fields.extend(more);
                    }
                }
                fields.sort_by_key(|(f, _)| *f);
                return Ok(Expr::Fields(fields));
            }
            Ok(Expr::Apply(spec, args))
        }
    }
}

fn starts_fields(item: Option<&Item<'_>>) -> bool {
    match item {
        Some(Item::Name(name)) => operators::lookup(name).is_some_and(|s| matches!(s.op, Op::Field(_))),
        Some(Item::Built(Expr::Fields(_))) => true,
        _ => false,
    }
}

/// Reads a node as one expression, or none for empty (Nil) nodes. Several
/// field expressions side by side merge into one field map.
fn tree_expr(t: &TargetTree) -> Result<Option<Expr>, EvalError> {
    if t.label.category == Category::Nil {
        return Ok(None);
    }
    let mut items = Vec::with_capacity(t.children.len());
    for c in &t.children {
        match c {
            TargetNode::Operator(o) => items.push(Item::Name(o)),
            TargetNode::Int(n) => items.push(Item::Int(*n)),
            TargetNode::Tree(sub) => {
                if let Some(e) = tree_expr(sub)? {
                    items.push(Item::Built(e));
                }
            }
        }
    }
    let mut iter = items.into_iter().peekable();
    let mut exprs = Vec::new();
    while iter.peek().is_some() {
        exprs.push(read_expr(&mut iter)?);
    }
    match exprs.len() {
        0 => Ok(None),
        1 => Ok(exprs.pop()),
        _ => Err(EvalError::Malformed(format!("{} leaves more than one expression", t.label))),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Apply(spec, args) => {
                f.write_str(spec.name)?;
                if !args.is_empty() {
                    f.write_char('(')?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_char(')')?;
                }
                Ok(())
            }
            Expr::Fields(fs) => {
                f.write_char('(')?;
                for (i, (field, v)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{field}={v}")?;
                }
                f.write_char(')')
            }
        }
    }
}

/// Intermediate values during evaluation.
enum Value {
    Int(i64),
    Unspecified,
    Unit(PeriodUnit),
    PartOfDay(PartOfDay),
    Season(Season),
    Fields(FieldMap),
    Obj(TemporalObject),
}

fn span_unit(u: PeriodUnit) -> SpanUnit {
    match u {
        PeriodUnit::Century => SpanUnit::Century,
        PeriodUnit::Decade => SpanUnit::Decade,
        PeriodUnit::Year => SpanUnit::Year,
        PeriodUnit::Quarter => SpanUnit::Quarter,
        PeriodUnit::Month => SpanUnit::Month,
        PeriodUnit::Week => SpanUnit::Week,
        PeriodUnit::Day => SpanUnit::Day,
        PeriodUnit::Hour => SpanUnit::Hour,
        PeriodUnit::Minute => SpanUnit::Minute,
        PeriodUnit::Second => SpanUnit::Second,
    }
}

/// The field printed at each position of a date/time value, coarsest first.
const POSITIONS: [(SpanUnit, CalendarField); 5] = [
    (SpanUnit::Month, CalendarField::MonthOfYear),
    (SpanUnit::Day, CalendarField::DayOfMonth),
    (SpanUnit::Hour, CalendarField::HourOfDay),
    (SpanUnit::Minute, CalendarField::MinuteOfHour),
    (SpanUnit::Second, CalendarField::SecondOfMinute),
];

/// Evaluates target trees. Holds the part-of-day boundaries in use.
#[derive(Debug, Clone, Default)]
pub struct Evaluator {
    pub table: PartOfDayTable,
}

impl Evaluator {
    pub fn new(table: PartOfDayTable) -> Self {
        Evaluator { table }
    }

    /// Operator-form rendering of a target tree, for example
    /// `FindEarlier(Present, (MonthOfYear=3, DayOfMonth=6))`.
    pub fn describe(target: &TargetTree) -> Result<String, EvalError> {
        tree_expr(target)?.map(|e| e.to_string()).ok_or(EvalError::Empty)
    }

    pub fn evaluate(&self, target: &TargetTree, anchor: Anchor) -> Result<TemporalObject, EvalError> {
        let expr = tree_expr(target)?.ok_or(EvalError::Empty)?;
        match self.eval(&expr, anchor)? {
            Value::Obj(o) => Ok(o),
            _ => Err(EvalError::Type {
                op: target.label.to_string(),
                expected: "a time span, period or reference",
            }),
        }
    }

    fn eval(&self, expr: &Expr, anchor: Anchor) -> Result<Value, EvalError> {
        let (spec, args) = match expr {
            Expr::Int(n) => return Ok(Value::Int(*n)),
            Expr::Fields(fs) => {
                let mut map = FieldMap::new();
                for (f, e) in fs {
                    let v = match self.eval(e, anchor)? {
                        Value::Int(n) => FieldValue::Int(n),
                        Value::Unspecified => FieldValue::Unspecified,
                        Value::Season(s) => FieldValue::Season(s),
                        Value::PartOfDay(p) => FieldValue::PartOfDay(p),
                        _ => {
                            return Err(EvalError::Type {
                                op: f.name().into(),
                                expected: "an integer or calendar constant",
                            })
                        }
                    };
                    map.insert(*f, v)?;
                }
                return Ok(Value::Fields(map));
            }
            Expr::Apply(spec, args) => (*spec, args),
        };
        let type_err = |expected| EvalError::Type {
            op: spec.name.into(),
            expected,
        };
        let vals = args
            .iter()
            .map(|a| self.eval(a, anchor))
            .collect::<Result<Vec<_>, _>>()?;
        let span_at = |i: usize| match &vals[i] {
            Value::Obj(TemporalObject::Span(s)) => Ok(s.clone()),
            _ => Err(type_err("a time span")),
        };
        let fields_at = |i: usize| match &vals[i] {
            Value::Fields(f) => Ok(f.clone()),
            _ => Err(type_err("calendar fields")),
        };
        let period_at = |i: usize| match &vals[i] {
            Value::Obj(TemporalObject::Period(p)) => Ok(p.clone()),
            _ => Err(type_err("a period")),
        };
        let obj = |o| Ok(Value::Obj(o));
        match spec.op {
            Op::Present => {
                let g = granule_containing(anchor.instant(), SpanUnit::Day, &self.table)?;
                obj(TemporalObject::Span(TimeSpanObject::granule(g, SpanUnit::Day)))
            }
            Op::FindEarlier | Op::FindLater => {
                let reference = span_at(0)?;
                let fields = fields_at(1)?;
                let dir = if spec.op == Op::FindEarlier {
                    Direction::Earlier
                } else {
                    Direction::Later
                };
                let g = find_matching(reference.interval(), &fields, dir, &self.table)?;
                obj(TemporalObject::Span(self.field_span(g, &fields)))
            }
            Op::FindEnclosing => {
                let inner = span_at(0)?;
                let Value::Unit(u) = vals[1] else {
                    return Err(type_err("a unit"));
                };
                let unit = span_unit(u);
                let g = granule_containing(inner.start, unit, &self.table)?;
                obj(TemporalObject::Span(TimeSpanObject::granule(g, unit)))
            }
            Op::FindEnclosed => {
                let outer = span_at(0)?;
                let fields = fields_at(1)?;
                let g = find_enclosed(outer.interval(), &fields, &self.table)?;
                obj(TemporalObject::Span(self.field_span(g, &fields)))
            }
            Op::Absolute => {
                let fields = fields_at(0)?;
                let Some(FieldValue::Int(year)) = fields.get(CalendarField::Year) else {
                    return Err(EvalError::MissingYear);
                };
                let year = i32::try_from(year).map_err(|_| CalendarError::OutOfRange)?;
                let start = chrono::NaiveDate::from_ymd_opt(year, 1, 1)
                    .ok_or(CalendarError::OutOfRange)?
                    .and_time(chrono::NaiveTime::MIN);
                // a winter begins in December and runs into the next year
                let end = add_months(start, 15)?;
                let g = find_enclosed(Interval { start, end }, &fields, &self.table)?;
                obj(TemporalObject::Span(self.field_span(g, &fields)))
            }
            Op::MoveEarlier | Op::MoveLater => {
                let span = span_at(0)?;
                let period = period_at(1)?;
                let (mut months, mut exact) = period.shift()?;
                if spec.op == Op::MoveEarlier {
                    months = -months;
                    exact = -exact;
                }
                let move_point = |t: NaiveDateTime| -> Result<NaiveDateTime, CalendarError> {
                    add_duration(add_months(t, months)?, exact)
                };
                let start = move_point(span.start)?;
                let single = span.extent.is_none()
                    && span.unit != SpanUnit::PartOfDay
                    && granule_end(span.start, span.unit).ok() == Some(span.end);
                let end = if single {
                    granule_end(start, span.unit)?
                } else {
                    move_point(span.end)?
                };
                obj(TemporalObject::Span(TimeSpanObject { start, end, ..span }))
            }
            Op::StartAtEndOf | Op::EndAtStartOf => {
                let span = span_at(0)?;
                let period = period_at(1)?;
                let (months, exact) = period.shift()?;
                let (start, end) = if spec.op == Op::StartAtEndOf {
                    (span.end, add_duration(add_months(span.end, months)?, exact)?)
                } else {
                    (add_duration(add_months(span.start, -months)?, -exact)?, span.start)
                };
                obj(TemporalObject::Span(TimeSpanObject {
                    start,
                    end,
                    unit: span.unit,
                    underspecified: BTreeSet::new(),
                    extent: Some(period),
                }))
            }
            Op::Simple => {
                let amount = match vals[0] {
                    Value::Int(n) => Amount::Count(u64::try_from(n).map_err(|_| type_err("a non-negative amount"))?),
                    Value::Unspecified => Amount::Unspecified,
                    _ => return Err(type_err("an amount")),
                };
                let Value::Unit(u) = vals[1] else {
                    return Err(type_err("a unit"));
                };
                obj(TemporalObject::Period(PeriodObject::new(u, amount)))
            }
            Op::Sum => match (&vals[0], &vals[1]) {
                (Value::Int(a), Value::Int(b)) => a.checked_add(*b).map(Value::Int).ok_or(EvalError::Overflow),
                (Value::Obj(TemporalObject::Period(a)), Value::Obj(TemporalObject::Period(b))) => {
                    obj(TemporalObject::Period(a.sum(b).ok_or(EvalError::Overflow)?))
                }
                _ => Err(type_err("two integers or two periods")),
            },
            Op::Product => match (&vals[0], &vals[1]) {
                (Value::Int(a), Value::Int(b)) => a.checked_mul(*b).map(Value::Int).ok_or(EvalError::Overflow),
                (Value::Int(k), Value::Obj(TemporalObject::Period(p))) => {
                    let k = u64::try_from(*k).map_err(|_| type_err("a non-negative factor"))?;
                    obj(TemporalObject::Period(p.scale(k).ok_or(EvalError::Overflow)?))
                }
                _ => Err(type_err("two integers or an integer and a period")),
            },
            Op::SetOf => {
                let mut p = period_at(0)?;
                p.set = true;
                obj(TemporalObject::Period(p))
            }
            Op::PastRef => obj(TemporalObject::Ref(RefObject {
                direction: RefDirection::Past,
            })),
            Op::PresentRef => obj(TemporalObject::Ref(RefObject {
                direction: RefDirection::Present,
            })),
            Op::FutureRef => obj(TemporalObject::Ref(RefObject {
                direction: RefDirection::Future,
            })),
            Op::Field(_) => unreachable!("field operators are read as field maps"),
            Op::Unit(u) => Ok(Value::Unit(u)),
            Op::PartOfDay(p) => Ok(Value::PartOfDay(p)),
            Op::Season(s) => Ok(Value::Season(s)),
            Op::Unspecified => Ok(Value::Unspecified),
        }
    }

    /// A granule found from field constraints. Unspecified fields finer than
    /// the granule widen the reported unit and print as `X`.
    fn field_span(&self, g: Interval, fields: &FieldMap) -> TimeSpanObject {
        let found = fields.specified_unit().expect("search succeeded on specified fields");
        let unit = fields.unit().unwrap_or(found).max(found);
        let mut span = TimeSpanObject::granule(g, found);
        if unit > found {
            span.unit = unit;
            span.underspecified = POSITIONS
                .iter()
                .filter(|(u, _)| *u > found && *u <= unit)
                .map(|(_, f)| *f)
                .collect();
        }
        span
    }

    pub fn to_timeml(&self, obj: &TemporalObject) -> String {
        match obj {
            TemporalObject::Period(p) => format_period(&p.amounts),
            TemporalObject::Ref(r) => match r.direction {
                RefDirection::Past => "PAST_REF",
                RefDirection::Present => "PRESENT_REF",
                RefDirection::Future => "FUTURE_REF",
            }
            .to_string(),
            TemporalObject::Span(s) => match &s.extent {
                Some(p) => format_period(&p.amounts),
                None => self.span_value(s),
            },
        }
    }

    fn span_value(&self, s: &TimeSpanObject) -> String {
        let t = s.start;
        let date = t.date();
        let x = |f: CalendarField| s.underspecified.contains(&f);
        let two = |f: CalendarField, n: u32| if x(f) { "XX".to_string() } else { format!("{n:02}") };
        let year = format!("{:04}", date.year());
        match s.unit {
            SpanUnit::Century => format!("{:02}", date.year().div_euclid(100)),
            SpanUnit::Decade => format!("{:03}", date.year().div_euclid(10)),
            SpanUnit::Year => year,
            SpanUnit::Season => {
                let (season, y) = match date.month() {
                    3..=5 => (Season::Spring, date.year()),
                    6..=8 => (Season::Summer, date.year()),
                    9..=11 => (Season::Fall, date.year()),
                    12 => (Season::Winter, date.year()),
                    _ => (Season::Winter, date.year() - 1),
                };
                format!("{y:04}-{}", season.code())
            }
            SpanUnit::Quarter => format!("{year}-Q{}", date.month0() / 3 + 1),
            SpanUnit::Month => format!("{year}-{}", two(CalendarField::MonthOfYear, date.month())),
            SpanUnit::Week => {
                let w = date.iso_week();
                format!("{:04}-W{:02}", w.year(), w.week())
            }
            _ => {
                let mut out = format!(
                    "{year}-{}-{}",
                    two(CalendarField::MonthOfYear, date.month()),
                    two(CalendarField::DayOfMonth, date.day())
                );
                match s.unit {
                    SpanUnit::PartOfDay => {
                        let part = PartOfDay::ALL
                            .into_iter()
                            .find(|p| self.table.hours(*p).0 == t.hour())
                            .unwrap_or(PartOfDay::Night);
                        let _ = write!(out, "T{}", part.code());
                    }
                    SpanUnit::Hour => {
                        let _ = write!(out, "T{}", two(CalendarField::HourOfDay, t.hour()));
                    }
                    SpanUnit::Minute => {
                        let _ = write!(
                            out,
                            "T{}:{}",
                            two(CalendarField::HourOfDay, t.hour()),
                            two(CalendarField::MinuteOfHour, t.minute())
                        );
                    }
                    SpanUnit::Second => {
                        let _ = write!(
                            out,
                            "T{}:{}:{}",
                            two(CalendarField::HourOfDay, t.hour()),
                            two(CalendarField::MinuteOfHour, t.minute()),
                            two(CalendarField::SecondOfMinute, t.second())
                        );
                    }
                    _ => {}
                }
                out
            }
        }
    }

    pub fn timex_type(obj: &TemporalObject) -> TimexType {
        match obj {
            TemporalObject::Period(p) if p.set => TimexType::Set,
            TemporalObject::Period(_) => TimexType::Duration,
            TemporalObject::Span(s) if s.extent.is_some() => TimexType::Duration,
            TemporalObject::Span(s) if s.unit >= SpanUnit::PartOfDay => TimexType::Time,
            TemporalObject::Span(_) | TemporalObject::Ref(_) => TimexType::Date,
        }
    }
}
