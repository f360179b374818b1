//! Timexes, their types and the document anchor they are normalized against.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// TIMEX3 type attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TimexType {
    #[serde(rename = "DATE")]
    Date,
    #[serde(rename = "TIME")]
    Time,
    #[serde(rename = "DURATION")]
    Duration,
    #[serde(rename = "SET")]
    Set,
}

impl TimexType {
    pub const ALL: [TimexType; 4] = [
        TimexType::Date,
        TimexType::Time,
        TimexType::Duration,
        TimexType::Set,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TimexType::Date => "DATE",
            TimexType::Time => "TIME",
            TimexType::Duration => "DURATION",
            TimexType::Set => "SET",
        }
    }
}

impl fmt::Display for TimexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown timex type `{0}`")]
pub struct UnknownTimexType(pub String);

impl FromStr for TimexType {
    type Err = UnknownTimexType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DATE" => Ok(TimexType::Date),
            "TIME" => Ok(TimexType::Time),
            "DURATION" => Ok(TimexType::Duration),
            "SET" => Ok(TimexType::Set),
            other => Err(UnknownTimexType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimexError {
    #[error("empty token span {start}..{end}")]
    EmptySpan { start: usize, end: usize },
    #[error("character span {start}..{end} is empty or reversed")]
    EmptyCharSpan { start: usize, end: usize },
}

/// A temporal expression located in a document.
///
/// `span` is a half-open, zero-based token range. `char_span` is a half-open
/// byte range into the document text, so `&text[char_span]` is the surface
/// string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timex {
    pub doc_id: String,
    pub span: Range<usize>,
    pub char_span: Range<usize>,
    pub text: String,
    #[serde(rename = "type")]
    pub kind: TimexType,
    pub value: Option<String>,
}

impl Timex {
    pub fn new(
        doc_id: impl Into<String>,
        span: Range<usize>,
        char_span: Range<usize>,
        text: impl Into<String>,
        kind: TimexType,
    ) -> Result<Self, TimexError> {
        if span.start >= span.end {
            return Err(TimexError::EmptySpan {
                start: span.start,
                end: span.end,
            });
        }
        if char_span.start >= char_span.end {
            return Err(TimexError::EmptyCharSpan {
                start: char_span.start,
                end: char_span.end,
            });
        }
        Ok(Timex {
            doc_id: doc_id.into(),
            span,
            char_span,
            text: text.into(),
            kind,
            value: None,
        })
    }

    pub fn with_value(mut self, value: impl Into<String>) -> Self {
        self.value = Some(value.into());
        self
    }

    pub fn overlaps(&self, other: &Timex) -> bool {
        self.span.start < other.span.end && other.span.start < self.span.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid anchor `{input}`: expected YYYY-MM-DD or YYYY-MM-DDTHH:MM[:SS]")]
pub struct AnchorParseError {
    pub input: String,
}

/// Document creation time used as the normalization anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
}

impl Anchor {
    pub fn from_date(date: NaiveDate) -> Self {
        Anchor { date, time: None }
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Anchor::from_date)
    }

    pub fn with_time(self, time: NaiveTime) -> Self {
        Anchor {
            time: Some(time),
            ..self
        }
    }

    /// The anchor as an instant; a date-only anchor is midnight.
    pub fn instant(&self) -> NaiveDateTime {
        self.date.and_time(self.time.unwrap_or(NaiveTime::MIN))
    }

    /// Parses an anchor, also accepting the TimeML-style creation-time values
    /// that carry a time or a trailing zone designator.
    pub fn parse(input: &str) -> Result<Self, AnchorParseError> {
        let err = || AnchorParseError {
            input: input.to_string(),
        };
        let s = input.trim();
        let (date_part, time_part) = match s.split_once('T') {
            Some((d, t)) => (d, Some(t)),
            None => (s, None),
        };
        if date_part.len() != 10 {
            return Err(err());
        }
        let date = NaiveDate::parse_from_str(date_part, "%Y-%m-%d").map_err(|_| err())?;
        let time = match time_part {
            None => None,
            Some(t) => {
                // drop zone designators and fractional seconds
                let t = t
                    .trim_end_matches('Z')
                    .split(['+', '.'])
                    .next()
                    .unwrap_or_default();
                let parsed = NaiveTime::parse_from_str(t, "%H:%M:%S")
                    .or_else(|_| NaiveTime::parse_from_str(t, "%H:%M"))
                    .map_err(|_| err())?;
                Some(parsed)
            }
        };
        Ok(Anchor { date, time })
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.date.format("%Y-%m-%d"))?;
        if let Some(t) = self.time {
            write!(f, "T{:02}:{:02}:{:02}", t.hour(), t.minute(), t.second())?;
        }
        Ok(())
    }
}

impl FromStr for Anchor {
    type Err = AnchorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Anchor::parse(s)
    }
}
