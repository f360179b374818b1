//! TimeML value strings: classification, canonical forms and equivalence.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValueShape {
    Date,
    Time,
    Period,
    Ref,
}

/// Finest calendar unit a value specifies, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    Century,
    Decade,
    Year,
    Quarter,
    Month,
    Week,
    Day,
    PartOfDay,
    Hour,
    Minute,
    Second,
    Unspecified,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Granularity::Century => "century",
            Granularity::Decade => "decade",
            Granularity::Year => "year",
            Granularity::Quarter => "quarter",
            Granularity::Month => "month",
            Granularity::Week => "week",
            Granularity::Day => "day",
            Granularity::PartOfDay => "part-of-day",
            Granularity::Hour => "hour",
            Granularity::Minute => "minute",
            Granularity::Second => "second",
            Granularity::Unspecified => "unspecified",
        };
        f.write_str(s)
    }
}

/// A classified TimeML value string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeMLValue {
    pub raw: String,
    pub shape: ValueShape,
    pub granularity: Granularity,
    pub underspecified: bool,
}

pub const REF_VALUES: [&str; 3] = ["PAST_REF", "PRESENT_REF", "FUTURE_REF"];

/// Units that can carry an amount in a duration value, in serialization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodUnit {
    Century,
    Decade,
    Year,
    Quarter,
    Month,
    Week,
    Day,
    Hour,
    Minute,
    Second,
}

impl PeriodUnit {
    pub const ALL: [PeriodUnit; 10] = [
        PeriodUnit::Century,
        PeriodUnit::Decade,
        PeriodUnit::Year,
        PeriodUnit::Quarter,
        PeriodUnit::Month,
        PeriodUnit::Week,
        PeriodUnit::Day,
        PeriodUnit::Hour,
        PeriodUnit::Minute,
        PeriodUnit::Second,
    ];

    pub fn designator(self) -> &'static str {
        match self {
            PeriodUnit::Century => "CE",
            PeriodUnit::Decade => "DE",
            PeriodUnit::Year => "Y",
            PeriodUnit::Quarter => "Q",
            PeriodUnit::Month => "M",
            PeriodUnit::Week => "W",
            PeriodUnit::Day => "D",
            PeriodUnit::Hour => "H",
            PeriodUnit::Minute => "M",
            PeriodUnit::Second => "S",
        }
    }

    pub fn is_time(self) -> bool {
        matches!(self, PeriodUnit::Hour | PeriodUnit::Minute | PeriodUnit::Second)
    }

    pub fn granularity(self) -> Granularity {
        match self {
            PeriodUnit::Century => Granularity::Century,
            PeriodUnit::Decade => Granularity::Decade,
            PeriodUnit::Year => Granularity::Year,
            PeriodUnit::Quarter => Granularity::Quarter,
            PeriodUnit::Month => Granularity::Month,
            PeriodUnit::Week => Granularity::Week,
            PeriodUnit::Day => Granularity::Day,
            PeriodUnit::Hour => Granularity::Hour,
            PeriodUnit::Minute => Granularity::Minute,
            PeriodUnit::Second => Granularity::Second,
        }
    }
}

/// Amount of one unit in a duration; `Unspecified` serializes as `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Amount {
    Count(u64),
    Unspecified,
}

impl Amount {
    pub fn checked_add(self, other: Amount) -> Option<Amount> {
        match (self, other) {
            (Amount::Count(a), Amount::Count(b)) => a.checked_add(b).map(Amount::Count),
            _ => Some(Amount::Unspecified),
        }
    }

    pub fn checked_mul(self, k: u64) -> Option<Amount> {
        match self {
            Amount::Count(a) => a.checked_mul(k).map(Amount::Count),
            Amount::Unspecified => Some(Amount::Unspecified),
        }
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amount::Count(n) => write!(f, "{n}"),
            Amount::Unspecified => f.write_str("X"),
        }
    }
}

/// Parses `PnYnMnWnD`-style durations, including the TimeML `CE`, `DE` and
/// `Q` designators. Input must already be uppercase.
pub fn parse_period(raw: &str) -> Option<BTreeMap<PeriodUnit, Amount>> {
    let body = raw.strip_prefix('P')?;
    let (date_part, time_part) = match body.split_once('T') {
        Some((d, t)) => (d, Some(t)),
        None => (body, None),
    };
    let mut amounts = BTreeMap::new();
    let mut last: Option<PeriodUnit> = None;
    let mut push = |unit: PeriodUnit, amount: Amount| -> Option<()> {
        // units must appear at most once and in order
        if last.is_some_and(|l| l >= unit) {
            return None;
        }
        last = Some(unit);
        amounts.insert(unit, amount);
        Some(())
    };
    let mut rest = date_part;
    while !rest.is_empty() {
        let (amount, after) = split_amount(rest)?;
        let (unit, after) = if let Some(a) = after.strip_prefix("CE") {
            (PeriodUnit::Century, a)
        } else if let Some(a) = after.strip_prefix("DE") {
            (PeriodUnit::Decade, a)
        } else {
            let c = after.chars().next()?;
            let unit = match c {
                'Y' => PeriodUnit::Year,
                'Q' => PeriodUnit::Quarter,
                'M' => PeriodUnit::Month,
                'W' => PeriodUnit::Week,
                'D' => PeriodUnit::Day,
                _ => return None,
            };
            (unit, &after[1..])
        };
        push(unit, amount)?;
        rest = after;
    }
    if let Some(time) = time_part {
        if time.is_empty() {
            return None;
        }
        let mut rest = time;
        while !rest.is_empty() {
            let (amount, after) = split_amount(rest)?;
            let unit = match after.chars().next()? {
                'H' => PeriodUnit::Hour,
                'M' => PeriodUnit::Minute,
                'S' => PeriodUnit::Second,
                _ => return None,
            };
            push(unit, amount)?;
            rest = &after[1..];
        }
    }
    if amounts.is_empty() {
        return None;
    }
    Some(amounts)
}

fn split_amount(s: &str) -> Option<(Amount, &str)> {
    if let Some(rest) = s.strip_prefix('X') {
        return Some((Amount::Unspecified, rest));
    }
    let digits = s.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let n = s[..digits].parse().ok()?;
    Some((Amount::Count(n), &s[digits..]))
}

/// Serializes a duration map. Zero amounts are omitted unless every amount
/// is zero, in which case the finest unit is kept (`P0D`).
pub fn format_period(amounts: &BTreeMap<PeriodUnit, Amount>) -> String {
    let nonzero: Vec<(PeriodUnit, Amount)> = amounts
        .iter()
        .filter(|(_, a)| **a != Amount::Count(0))
        .map(|(u, a)| (*u, *a))
        .collect();
    let parts = if nonzero.is_empty() {
        amounts
            .iter()
            .next_back()
            .map(|(u, a)| vec![(*u, *a)])
            .unwrap_or_else(|| vec![(PeriodUnit::Day, Amount::Count(0))])
    } else {
        nonzero
    };
    let mut out = String::from("P");
    let mut in_time = false;
    for (unit, amount) in parts {
        if unit.is_time() && !in_time {
            out.push('T');
            in_time = true;
        }
        out.push_str(&amount.to_string());
        out.push_str(unit.designator());
    }
    out
}

struct DatePattern {
    re: Regex,
    shape: ValueShape,
    granularity: Granularity,
}

static DATE_PATTERNS: LazyLock<Vec<DatePattern>> = LazyLock::new(|| {
    let d = "[0-9X]";
    let day = format!("{d}{{4}}-{d}{{2}}-{d}{{2}}");
    let table: Vec<(String, ValueShape, Granularity)> = vec![
        (format!("{d}{{2}}"), ValueShape::Date, Granularity::Century),
        (format!("{d}{{3}}"), ValueShape::Date, Granularity::Decade),
        (format!("{d}{{4}}"), ValueShape::Date, Granularity::Year),
        (format!("{d}{{4}}-Q[1-4X]"), ValueShape::Date, Granularity::Quarter),
        (format!("{d}{{4}}-(SP|SU|FA|WI)"), ValueShape::Date, Granularity::Quarter),
        (format!("{d}{{4}}-{d}{{2}}"), ValueShape::Date, Granularity::Month),
        (format!("{d}{{4}}-W{d}{{2}}"), ValueShape::Date, Granularity::Week),
        (day.clone(), ValueShape::Date, Granularity::Day),
        (format!("{day}T(MO|MI|AF|EV|NI|DT)"), ValueShape::Time, Granularity::PartOfDay),
        (format!("{day}T{d}{{2}}"), ValueShape::Time, Granularity::Hour),
        (format!("{day}T{d}{{2}}:{d}{{2}}"), ValueShape::Time, Granularity::Minute),
        (format!("{day}T{d}{{2}}:{d}{{2}}:{d}{{2}}"), ValueShape::Time, Granularity::Second),
    ];
    table
        .into_iter()
        .map(|(p, shape, granularity)| DatePattern {
            re: Regex::new(&format!("^{p}$")).expect("static pattern"),
            shape,
            granularity,
        })
        .collect()
});

/// Classifies a TimeML value. Total: unknown strings fall back by their
/// leading characters, and anything unrecognizable becomes an underspecified
/// DATE of unspecified granularity.
pub fn classify_value(raw: &str) -> TimeMLValue {
    let upper = raw.trim().to_uppercase();
    let make = |shape, granularity, underspecified| TimeMLValue {
        raw: raw.to_string(),
        shape,
        granularity,
        underspecified,
    };
    if REF_VALUES.contains(&upper.as_str()) {
        return make(ValueShape::Ref, Granularity::Unspecified, false);
    }
    if upper.starts_with('P') {
        let granularity = parse_period(&upper)
            .and_then(|m| m.keys().next_back().map(|u| u.granularity()))
            .unwrap_or(Granularity::Unspecified);
        return make(ValueShape::Period, granularity, false);
    }
    for pattern in DATE_PATTERNS.iter() {
        if pattern.re.is_match(&upper) {
            // 'X' only matches digit positions in these patterns
            return make(pattern.shape, pattern.granularity, upper.contains('X'));
        }
    }
    if upper.ends_with("_REF") {
        return make(ValueShape::Ref, Granularity::Unspecified, false);
    }
    make(ValueShape::Date, Granularity::Unspecified, true)
}

/// Canonical form under which equal durations compare equal: decades,
/// centuries and quarters are rewritten to years and months. Weeks and
/// calendar-dependent conversions are left alone.
pub fn canonicalize_value(raw: &str) -> String {
    let upper = raw.trim().to_uppercase();
    if !upper.starts_with('P') {
        return upper;
    }
    let Some(amounts) = parse_period(&upper) else {
        return upper;
    };
    let mut canon: BTreeMap<PeriodUnit, Amount> = BTreeMap::new();
    for (unit, amount) in amounts {
        let (target, factor) = match unit {
            PeriodUnit::Century => (PeriodUnit::Year, 100),
            PeriodUnit::Decade => (PeriodUnit::Year, 10),
            PeriodUnit::Quarter => (PeriodUnit::Month, 3),
            other => (other, 1),
        };
        let Some(scaled) = amount.checked_mul(factor) else {
            return upper;
        };
        let merged = match canon.get(&target) {
            Some(prev) => match prev.checked_add(scaled) {
                Some(m) => m,
                None => return upper,
            },
            None => scaled,
        };
        canon.insert(target, merged);
    }
    format_period(&canon)
}

/// Whether two values denote the same thing up to canonicalization.
pub fn values_equivalent(a: &str, b: &str) -> bool {
    canonicalize_value(a) == canonicalize_value(b)
}
