//! The fixed registry of target-side symbols. Grammar files may only use
//! names listed here; everything else fails at load time.

use crate::value::PeriodUnit;

use super::calendar::{CalendarField, PartOfDay, Season};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    /// The anchor day.
    Present,
    /// `(span, fields)`: latest matching granule strictly before the span.
    FindEarlier,
    /// `(span, fields)`: earliest matching granule strictly after the span.
    FindLater,
    /// `(span, unit)`: the unit granule containing the span start.
    FindEnclosing,
    /// `(span, fields)`: first matching granule inside the span.
    FindEnclosed,
    /// `(fields)`: the granule named by absolute fields; needs `Year`.
    Absolute,
    /// `(span, period)`
    MoveEarlier,
    /// `(span, period)`
    MoveLater,
    /// `(span, period)`: the period starting where the span ends.
    StartAtEndOf,
    /// `(span, period)`: the period ending where the span starts.
    EndAtStartOf,
    /// `(amount, unit)`
    Simple,
    /// Adds two periods unit-wise, or two integers.
    Sum,
    /// Multiplies two integers.
    Product,
    /// `(period)`: a recurring period.
    SetOf,
    PastRef,
    PresentRef,
    FutureRef,
    Field(CalendarField),
    Unit(PeriodUnit),
    PartOfDay(PartOfDay),
    Season(Season),
    /// An amount or field value left open; serializes as `X`.
    Unspecified,
}

#[derive(Debug, Clone, Copy)]
pub struct OperatorSpec {
    pub name: &'static str,
    pub arity: usize,
    pub op: Op,
}

const fn spec(name: &'static str, arity: usize, op: Op) -> OperatorSpec {
    OperatorSpec { name, arity, op }
}

pub static REGISTRY: &[OperatorSpec] = &[
    spec("Present", 0, Op::Present),
    spec("FindEarlier", 2, Op::FindEarlier),
    spec("FindLater", 2, Op::FindLater),
    spec("FindEnclosing", 2, Op::FindEnclosing),
    spec("FindEnclosed", 2, Op::FindEnclosed),
    spec("Absolute", 1, Op::Absolute),
    spec("MoveEarlier", 2, Op::MoveEarlier),
    spec("MoveLater", 2, Op::MoveLater),
    spec("StartAtEndOf", 2, Op::StartAtEndOf),
    spec("EndAtStartOf", 2, Op::EndAtStartOf),
    spec("Simple", 2, Op::Simple),
    spec("Sum", 2, Op::Sum),
    spec("Product", 2, Op::Product),
    spec("SetOf", 1, Op::SetOf),
    spec("PastRef", 0, Op::PastRef),
    spec("PresentRef", 0, Op::PresentRef),
    spec("FutureRef", 0, Op::FutureRef),
    spec("Year", 1, Op::Field(CalendarField::Year)),
    spec("DecadeOfCentury", 1, Op::Field(CalendarField::DecadeOfCentury)),
    spec("SeasonOfYear", 1, Op::Field(CalendarField::SeasonOfYear)),
    spec("MonthOfYear", 1, Op::Field(CalendarField::MonthOfYear)),
    spec("DayOfMonth", 1, Op::Field(CalendarField::DayOfMonth)),
    spec("DayOfWeek", 1, Op::Field(CalendarField::DayOfWeek)),
    spec("PartOfDay", 1, Op::Field(CalendarField::PartOfDay)),
    spec("HourOfDay", 1, Op::Field(CalendarField::HourOfDay)),
    spec("MinuteOfHour", 1, Op::Field(CalendarField::MinuteOfHour)),
    spec("SecondOfMinute", 1, Op::Field(CalendarField::SecondOfMinute)),
    spec("Centuries", 0, Op::Unit(PeriodUnit::Century)),
    spec("Decades", 0, Op::Unit(PeriodUnit::Decade)),
    spec("Years", 0, Op::Unit(PeriodUnit::Year)),
    spec("Quarters", 0, Op::Unit(PeriodUnit::Quarter)),
    spec("Months", 0, Op::Unit(PeriodUnit::Month)),
    spec("Weeks", 0, Op::Unit(PeriodUnit::Week)),
    spec("Days", 0, Op::Unit(PeriodUnit::Day)),
    spec("Hours", 0, Op::Unit(PeriodUnit::Hour)),
    spec("Minutes", 0, Op::Unit(PeriodUnit::Minute)),
    spec("Seconds", 0, Op::Unit(PeriodUnit::Second)),
    spec("Morning", 0, Op::PartOfDay(PartOfDay::Morning)),
    spec("Afternoon", 0, Op::PartOfDay(PartOfDay::Afternoon)),
    spec("Evening", 0, Op::PartOfDay(PartOfDay::Evening)),
    spec("Night", 0, Op::PartOfDay(PartOfDay::Night)),
    spec("Spring", 0, Op::Season(Season::Spring)),
    spec("Summer", 0, Op::Season(Season::Summer)),
    spec("Fall", 0, Op::Season(Season::Fall)),
    spec("Winter", 0, Op::Season(Season::Winter)),
    spec("Unspecified", 0, Op::Unspecified),
];

pub fn lookup(name: &str) -> Option<&'static OperatorSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

pub fn is_known(name: &str) -> bool {
    lookup(name).is_some()
}
