//! Calendar granules and field search.
//!
//! A granule is a half-open interval `[start, end)` of one calendar unit.
//! Searches walk granules outward from a reference span until the field
//! constraints match, giving up after a fixed horizon.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, Duration, Months, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use thiserror::Error;

/// Searches give up after this many years; any satisfiable combination of
/// fields recurs within one 400-year Gregorian cycle.
pub const SEARCH_HORIZON_YEARS: i32 = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartOfDay {
    Night,
    Morning,
    Afternoon,
    Evening,
}

impl PartOfDay {
    pub const ALL: [PartOfDay; 4] = [
        PartOfDay::Night,
        PartOfDay::Morning,
        PartOfDay::Afternoon,
        PartOfDay::Evening,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartOfDay::Night => "Night",
            PartOfDay::Morning => "Morning",
            PartOfDay::Afternoon => "Afternoon",
            PartOfDay::Evening => "Evening",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        PartOfDay::ALL.into_iter().find(|p| p.name() == s)
    }

    /// TimeML part-of-day code.
    pub fn code(self) -> &'static str {
        match self {
            PartOfDay::Night => "NI",
            PartOfDay::Morning => "MO",
            PartOfDay::Afternoon => "AF",
            PartOfDay::Evening => "EV",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("part of day must satisfy 0 <= from < to <= 24, got {from}-{to}")]
pub struct BadPartOfDay {
    pub from: u32,
    pub to: u32,
}

/// Clock boundaries of each part of the day, in whole hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartOfDayTable {
    hours: [(u32, u32); 4],
}

impl Default for PartOfDayTable {
    fn default() -> Self {
        // Night, Morning, Afternoon, Evening
        PartOfDayTable {
            hours: [(0, 6), (6, 12), (12, 18), (18, 24)],
        }
    }
}

impl PartOfDayTable {
    pub fn hours(&self, part: PartOfDay) -> (u32, u32) {
        self.hours[part as usize]
    }

    pub fn set(&mut self, part: PartOfDay, from: u32, to: u32) -> Result<(), BadPartOfDay> {
        if from >= to || to > 24 {
            return Err(BadPartOfDay { from, to });
        }
        self.hours[part as usize] = (from, to);
        Ok(())
    }

    fn contains_hour(&self, part: PartOfDay, hour: u32) -> bool {
        let (from, to) = self.hours(part);
        from <= hour && hour < to
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Season {
    Spring,
    Summer,
    Fall,
    Winter,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Spring, Season::Summer, Season::Fall, Season::Winter];

    pub fn code(self) -> &'static str {
        match self {
            Season::Spring => "SP",
            Season::Summer => "SU",
            Season::Fall => "FA",
            Season::Winter => "WI",
        }
    }

    /// First month of the season. Winter runs December to February and is
    /// labelled with the year of its December.
    fn first_month(self) -> u32 {
        match self {
            Season::Spring => 3,
            Season::Summer => 6,
            Season::Fall => 9,
            Season::Winter => 12,
        }
    }

    fn containing(date: NaiveDate) -> (Season, i32) {
        match date.month() {
            3..=5 => (Season::Spring, date.year()),
            6..=8 => (Season::Summer, date.year()),
            9..=11 => (Season::Fall, date.year()),
            12 => (Season::Winter, date.year()),
            _ => (Season::Winter, date.year() - 1),
        }
    }
}

/// Calendar fields a grammar can constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CalendarField {
    Year,
    DecadeOfCentury,
    SeasonOfYear,
    MonthOfYear,
    DayOfMonth,
    DayOfWeek,
    PartOfDay,
    HourOfDay,
    MinuteOfHour,
    SecondOfMinute,
}

impl CalendarField {
    pub fn name(self) -> &'static str {
        match self {
            CalendarField::Year => "Year",
            CalendarField::DecadeOfCentury => "DecadeOfCentury",
            CalendarField::SeasonOfYear => "SeasonOfYear",
            CalendarField::MonthOfYear => "MonthOfYear",
            CalendarField::DayOfMonth => "DayOfMonth",
            CalendarField::DayOfWeek => "DayOfWeek",
            CalendarField::PartOfDay => "PartOfDay",
            CalendarField::HourOfDay => "HourOfDay",
            CalendarField::MinuteOfHour => "MinuteOfHour",
            CalendarField::SecondOfMinute => "SecondOfMinute",
        }
    }

    /// The granule a constraint on this field selects.
    pub fn unit(self) -> SpanUnit {
        match self {
            CalendarField::Year => SpanUnit::Year,
            CalendarField::DecadeOfCentury => SpanUnit::Decade,
            CalendarField::SeasonOfYear => SpanUnit::Season,
            CalendarField::MonthOfYear => SpanUnit::Month,
            CalendarField::DayOfMonth | CalendarField::DayOfWeek => SpanUnit::Day,
            CalendarField::PartOfDay => SpanUnit::PartOfDay,
            CalendarField::HourOfDay => SpanUnit::Hour,
            CalendarField::MinuteOfHour => SpanUnit::Minute,
            CalendarField::SecondOfMinute => SpanUnit::Second,
        }
    }

    fn int_domain(self) -> Option<(i64, i64)> {
        match self {
            CalendarField::Year => Some((-9999, 9999)),
            CalendarField::DecadeOfCentury => Some((0, 9)),
            CalendarField::MonthOfYear => Some((1, 12)),
            CalendarField::DayOfMonth => Some((1, 31)),
            CalendarField::DayOfWeek => Some((1, 7)),
            CalendarField::HourOfDay => Some((0, 23)),
            CalendarField::MinuteOfHour | CalendarField::SecondOfMinute => Some((0, 59)),
            CalendarField::SeasonOfYear | CalendarField::PartOfDay => None,
        }
    }
}

impl fmt::Display for CalendarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldValue {
    Int(i64),
    Season(Season),
    PartOfDay(PartOfDay),
    Unspecified,
}

impl fmt::Display for FieldValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldValue::Int(n) => write!(f, "{n}"),
            FieldValue::Season(s) => write!(f, "{s:?}"),
            FieldValue::PartOfDay(p) => f.write_str(p.name()),
            FieldValue::Unspecified => f.write_str("X"),
        }
    }
}

/// Calendar field constraints, each field at most once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldMap(BTreeMap<CalendarField, FieldValue>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field {0} given twice")]
    Duplicate(CalendarField),
    #[error("value {value} out of range for {field}")]
    OutOfDomain { field: CalendarField, value: FieldValue },
}

impl FieldMap {
    pub fn new() -> Self {
        FieldMap::default()
    }

    pub fn insert(&mut self, field: CalendarField, value: FieldValue) -> Result<(), FieldError> {
        let ok = match (field.int_domain(), value) {
            (_, FieldValue::Unspecified) => true,
            (Some((lo, hi)), FieldValue::Int(n)) => lo <= n && n <= hi,
            (None, FieldValue::Season(_)) => field == CalendarField::SeasonOfYear,
            (None, FieldValue::PartOfDay(_)) => field == CalendarField::PartOfDay,
            _ => false,
        };
        if !ok {
            return Err(FieldError::OutOfDomain { field, value });
        }
        if self.0.contains_key(&field) {
            return Err(FieldError::Duplicate(field));
        }
        self.0.insert(field, value);
        Ok(())
    }

    pub fn merge(&mut self, other: FieldMap) -> Result<(), FieldError> {
        for (f, v) in other.0 {
            self.insert(f, v)?;
        }
        Ok(())
    }

    pub fn get(&self, field: CalendarField) -> Option<FieldValue> {
        self.0.get(&field).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CalendarField, FieldValue)> + '_ {
        self.0.iter().map(|(f, v)| (*f, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn specified(&self) -> impl Iterator<Item = (CalendarField, FieldValue)> + '_ {
        self.iter().filter(|(_, v)| *v != FieldValue::Unspecified)
    }

    /// Finest unit among all fields, specified or not.
    pub fn unit(&self) -> Option<SpanUnit> {
        self.0.keys().map(|f| f.unit()).max()
    }

    /// Finest unit among the specified fields.
    pub fn specified_unit(&self) -> Option<SpanUnit> {
        self.specified().map(|(f, _)| f.unit()).max()
    }

    pub fn unspecified_fields(&self) -> Vec<CalendarField> {
        self.iter()
            .filter(|(_, v)| *v == FieldValue::Unspecified)
            .map(|(f, _)| f)
            .collect()
    }
}

impl fmt::Display for FieldMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (field, value)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{field}={value}")?;
        }
        f.write_str(")")
    }
}

/// Unit of a time span, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpanUnit {
    Century,
    Decade,
    Year,
    Season,
    Quarter,
    Month,
    Week,
    Day,
    PartOfDay,
    Hour,
    Minute,
    Second,
}

impl SpanUnit {
    fn is_sub_day(self) -> bool {
        self >= SpanUnit::PartOfDay
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("no granule matching {fields} within {SEARCH_HORIZON_YEARS} years")]
    HorizonExceeded { fields: String },
    #[error("no granule matching {fields} inside the given span")]
    NotEnclosed { fields: String },
    #[error("field constraints are empty or entirely unspecified")]
    NoConstraints,
    #[error("date out of the supported calendar range")]
    OutOfRange,
    #[error("{0:?} granules cannot be used here")]
    UnsupportedUnit(SpanUnit),
}

/// A half-open calendar interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Interval {
    pub fn contains(&self, t: NaiveDateTime) -> bool {
        self.start <= t && t < self.end
    }
}

fn midnight(d: NaiveDate) -> NaiveDateTime {
    d.and_time(NaiveTime::MIN)
}

fn ymd(y: i32, m: u32, d: u32) -> Result<NaiveDate, CalendarError> {
    NaiveDate::from_ymd_opt(y, m, d).ok_or(CalendarError::OutOfRange)
}

pub fn add_months(t: NaiveDateTime, months: i64) -> Result<NaiveDateTime, CalendarError> {
    let m = Months::new(months.unsigned_abs().try_into().map_err(|_| CalendarError::OutOfRange)?);
    let r = if months >= 0 {
        t.checked_add_months(m)
    } else {
        t.checked_sub_months(m)
    };
    r.ok_or(CalendarError::OutOfRange)
}

pub fn add_duration(t: NaiveDateTime, d: Duration) -> Result<NaiveDateTime, CalendarError> {
    t.checked_add_signed(d).ok_or(CalendarError::OutOfRange)
}

/// The granule of `unit` containing `t`. Part-of-day granules come from
/// `table`; an hour outside every part has no part-of-day granule.
pub fn granule_containing(
    t: NaiveDateTime,
    unit: SpanUnit,
    table: &PartOfDayTable,
) -> Result<Interval, CalendarError> {
    let date = t.date();
    let start = match unit {
        SpanUnit::Century => midnight(ymd(date.year().div_euclid(100) * 100, 1, 1)?),
        SpanUnit::Decade => midnight(ymd(date.year().div_euclid(10) * 10, 1, 1)?),
        SpanUnit::Year => midnight(ymd(date.year(), 1, 1)?),
        SpanUnit::Season => {
            let (season, year) = Season::containing(date);
            midnight(ymd(year, season.first_month(), 1)?)
        }
        SpanUnit::Quarter => midnight(ymd(date.year(), (date.month0() / 3) * 3 + 1, 1)?),
        SpanUnit::Month => midnight(ymd(date.year(), date.month(), 1)?),
        SpanUnit::Week => {
            midnight(date - Duration::days(i64::from(date.weekday().num_days_from_monday())))
        }
        SpanUnit::Day => midnight(date),
        SpanUnit::PartOfDay => {
            let part = PartOfDay::ALL
                .into_iter()
                .find(|p| table.contains_hour(*p, t.hour()))
                .ok_or(CalendarError::UnsupportedUnit(unit))?;
            return part_interval(date, part, table);
        }
        SpanUnit::Hour => date.and_hms_opt(t.hour(), 0, 0).ok_or(CalendarError::OutOfRange)?,
        SpanUnit::Minute => date
            .and_hms_opt(t.hour(), t.minute(), 0)
            .ok_or(CalendarError::OutOfRange)?,
        SpanUnit::Second => date
            .and_hms_opt(t.hour(), t.minute(), t.second())
            .ok_or(CalendarError::OutOfRange)?,
    };
    Ok(Interval {
        start,
        end: granule_end(start, unit)?,
    })
}

/// End of the granule of `unit` starting at `start`. Not defined for
/// part-of-day granules, whose length depends on the table.
pub fn granule_end(start: NaiveDateTime, unit: SpanUnit) -> Result<NaiveDateTime, CalendarError> {
    match unit {
        SpanUnit::Century => add_months(start, 1200),
        SpanUnit::Decade => add_months(start, 120),
        SpanUnit::Year => add_months(start, 12),
        SpanUnit::Season | SpanUnit::Quarter => add_months(start, 3),
        SpanUnit::Month => add_months(start, 1),
        SpanUnit::Week => add_duration(start, Duration::weeks(1)),
        SpanUnit::Day => add_duration(start, Duration::days(1)),
        SpanUnit::PartOfDay => Err(CalendarError::UnsupportedUnit(unit)),
        SpanUnit::Hour => add_duration(start, Duration::hours(1)),
        SpanUnit::Minute => add_duration(start, Duration::minutes(1)),
        SpanUnit::Second => add_duration(start, Duration::seconds(1)),
    }
}

fn part_interval(date: NaiveDate, part: PartOfDay, table: &PartOfDayTable) -> Result<Interval, CalendarError> {
    let (from, to) = table.hours(part);
    let start = midnight(date) + Duration::hours(i64::from(from));
    let end = midnight(date) + Duration::hours(i64::from(to));
    Ok(Interval { start, end })
}

/// Whether a granule of `unit` starting at `start` satisfies every
/// specified field. Fields must not be finer than `unit`.
fn matches(start: NaiveDateTime, unit: SpanUnit, fields: &FieldMap, table: &PartOfDayTable) -> bool {
    let date = start.date();
    fields.specified().all(|(field, value)| match (field, value) {
        (CalendarField::Year, FieldValue::Int(y)) => {
            let year = if unit == SpanUnit::Season {
                Season::containing(date).1
            } else {
                date.year()
            };
            i64::from(year) == y
        }
        (CalendarField::DecadeOfCentury, FieldValue::Int(d)) => {
            i64::from(date.year().rem_euclid(100) / 10) == d
        }
        (CalendarField::SeasonOfYear, FieldValue::Season(s)) => Season::containing(date).0 == s,
        (CalendarField::MonthOfYear, FieldValue::Int(m)) => i64::from(date.month()) == m,
        (CalendarField::DayOfMonth, FieldValue::Int(d)) => i64::from(date.day()) == d,
        (CalendarField::DayOfWeek, FieldValue::Int(d)) => {
            i64::from(date.weekday().number_from_monday()) == d
        }
        (CalendarField::PartOfDay, FieldValue::PartOfDay(p)) => {
            if unit == SpanUnit::PartOfDay {
                table.hours(p).0 == start.hour()
            } else {
                table.contains_hour(p, start.hour())
            }
        }
        (CalendarField::HourOfDay, FieldValue::Int(h)) => i64::from(start.hour()) == h,
        (CalendarField::MinuteOfHour, FieldValue::Int(m)) => i64::from(start.minute()) == m,
        (CalendarField::SecondOfMinute, FieldValue::Int(s)) => i64::from(start.second()) == s,
        _ => false,
    })
}

/// Sub-day granules of `unit` within one day, in chronological order.
fn day_granules(date: NaiveDate, unit: SpanUnit, fields: &FieldMap, table: &PartOfDayTable) -> Vec<Interval> {
    let base = midnight(date);
    let fixed = |f: CalendarField| match fields.get(f) {
        Some(FieldValue::Int(n)) => Some(n),
        _ => None,
    };
    let hours: Vec<i64> = match fixed(CalendarField::HourOfDay) {
        Some(h) => vec![h],
        None => (0..24).collect(),
    };
    let mut out = Vec::new();
    match unit {
        SpanUnit::PartOfDay => {
            let mut parts: Vec<Interval> = PartOfDay::ALL
                .into_iter()
                .filter_map(|p| part_interval(date, p, table).ok())
                .collect();
            parts.sort();
            out = parts;
        }
        SpanUnit::Hour => {
            for h in hours {
                let start = base + Duration::hours(h);
                out.push(Interval {
                    start,
                    end: start + Duration::hours(1),
                });
            }
        }
        SpanUnit::Minute | SpanUnit::Second => {
            let minutes: Vec<i64> = match fixed(CalendarField::MinuteOfHour) {
                Some(m) => vec![m],
                None => (0..60).collect(),
            };
            for h in &hours {
                for m in &minutes {
                    let start = base + Duration::hours(*h) + Duration::minutes(*m);
                    if unit == SpanUnit::Minute {
                        out.push(Interval {
                            start,
                            end: start + Duration::minutes(1),
                        });
                        continue;
                    }
                    let seconds: Vec<i64> = match fixed(CalendarField::SecondOfMinute) {
                        Some(s) => vec![s],
                        None => (0..60).collect(),
                    };
                    for s in seconds {
                        let st = start + Duration::seconds(s);
                        out.push(Interval {
                            start: st,
                            end: st + Duration::seconds(1),
                        });
                    }
                }
            }
        }
        _ => {}
    }
    out.retain(|g| matches(g.start, unit, fields, table));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Earlier,
    Later,
}

/// Finds the nearest granule matching `fields` entirely before `reference`
/// (`end <= reference.start`) or entirely after it (`start >= reference.end`).
/// The granule unit is that of the finest specified field.
pub fn find_matching(
    reference: Interval,
    fields: &FieldMap,
    direction: Direction,
    table: &PartOfDayTable,
) -> Result<Interval, CalendarError> {
    let unit = fields.specified_unit().ok_or(CalendarError::NoConstraints)?;
    let horizon = |t: NaiveDateTime| -> Result<NaiveDateTime, CalendarError> {
        match direction {
            Direction::Earlier => add_months(t, -12 * i64::from(SEARCH_HORIZON_YEARS)),
            Direction::Later => add_months(t, 12 * i64::from(SEARCH_HORIZON_YEARS)),
        }
    };
    let exceeded = || CalendarError::HorizonExceeded {
        fields: fields.to_string(),
    };

    if unit.is_sub_day() {
        let limit = horizon(match direction {
            Direction::Earlier => reference.start,
            Direction::Later => reference.end,
        })?
        .date();
        let mut day = match direction {
            Direction::Earlier => reference.start.date(),
            Direction::Later => (reference.end - Duration::nanoseconds(1)).date(),
        };
        let day_fields = date_level(fields);
        loop {
            if matches(midnight(day), SpanUnit::Day, &day_fields, table) {
                let granules = day_granules(day, unit, fields, table);
                let hit = match direction {
                    Direction::Earlier => granules.into_iter().rev().find(|g| g.end <= reference.start),
                    Direction::Later => granules.into_iter().find(|g| g.start >= reference.end),
                };
                if let Some(g) = hit {
                    return Ok(g);
                }
            }
            day = match direction {
                Direction::Earlier if day > limit => day.pred_opt().ok_or(CalendarError::OutOfRange)?,
                Direction::Later if day < limit => day.succ_opt().ok_or(CalendarError::OutOfRange)?,
                _ => return Err(exceeded()),
            };
        }
    }

    let limit = horizon(match direction {
        Direction::Earlier => reference.start,
        Direction::Later => reference.end,
    })?;
    let mut g = match direction {
        Direction::Earlier => {
            let mut g = granule_containing(reference.start - Duration::nanoseconds(1), unit, table)?;
            while g.end > reference.start {
                g = granule_containing(g.start - Duration::nanoseconds(1), unit, table)?;
            }
            g
        }
        Direction::Later => {
            let mut g = granule_containing(reference.end, unit, table)?;
            while g.start < reference.end {
                g = granule_containing(g.end, unit, table)?;
            }
            g
        }
    };
    loop {
        if matches(g.start, unit, fields, table) {
            return Ok(g);
        }
        g = match direction {
            Direction::Earlier if g.start > limit => {
                granule_containing(g.start - Duration::nanoseconds(1), unit, table)?
            }
            Direction::Later if g.end < limit => granule_containing(g.end, unit, table)?,
            _ => return Err(exceeded()),
        };
    }
}

/// First granule inside `outer` matching `fields`.
pub fn find_enclosed(outer: Interval, fields: &FieldMap, table: &PartOfDayTable) -> Result<Interval, CalendarError> {
    let unit = fields.specified_unit().ok_or(CalendarError::NoConstraints)?;
    let not_found = || CalendarError::NotEnclosed {
        fields: fields.to_string(),
    };
    if unit.is_sub_day() {
        let day_fields = date_level(fields);
        let mut day = outer.start.date();
        while midnight(day) < outer.end {
            if matches(midnight(day), SpanUnit::Day, &day_fields, table) {
                if let Some(g) = day_granules(day, unit, fields, table)
                    .into_iter()
                    .find(|g| g.start >= outer.start && g.end <= outer.end)
                {
                    return Ok(g);
                }
            }
            day = day.succ_opt().ok_or(CalendarError::OutOfRange)?;
        }
        return Err(not_found());
    }
    let mut g = granule_containing(outer.start, unit, table)?;
    while g.start < outer.end {
        if g.start >= outer.start && g.end <= outer.end && matches(g.start, unit, fields, table) {
            return Ok(g);
        }
        g = granule_containing(g.end, unit, table)?;
    }
    Err(not_found())
}

fn date_level(fields: &FieldMap) -> FieldMap {
    let mut out = FieldMap::new();
    for (f, v) in fields.iter() {
        if !f.unit().is_sub_day() {
            out.0.insert(f, v);
        }
    }
    out
}
