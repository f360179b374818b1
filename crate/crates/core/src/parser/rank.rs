//! Ordering of competing parses.

use chrono::Duration;

use crate::eval::{Evaluator, TemporalObject};
use crate::timex::Anchor;

use super::SyncParse;

/// At most this many parses, taken in Nil-count and rule order, are
/// evaluated when ordering by evaluated span.
pub const RANK_EVALUATION_LIMIT: usize = 32;

pub fn rank_parses(parses: Vec<SyncParse>, anchor: Anchor) -> Vec<SyncParse> {
    rank_parses_with(parses, anchor, &Evaluator::default())
}

/// Orders parses by fewer Nil tokens, then by evaluated span (spans ending
/// before the anchor day first, nearest first; then non-span results; then
/// spans reaching the anchor day or later; then evaluation failures), then by
/// the grammar order of the rules used. The sort is stable.
pub fn rank_parses_with(parses: Vec<SyncParse>, anchor: Anchor, evaluator: &Evaluator) -> Vec<SyncParse> {
    if parses.len() <= 1 {
        return parses;
    }
    let mut keyed: Vec<(usize, SyncParse)> = parses.into_iter().map(|p| (p.nil_tokens(), p)).collect();
    keyed.sort_by(|(na, a), (nb, b)| na.cmp(nb).then_with(|| a.rules.cmp(&b.rules)));
    let rest = keyed.split_off(keyed.len().min(RANK_EVALUATION_LIMIT));

    let day_start = anchor.date.and_time(chrono::NaiveTime::MIN);
    let day_end = day_start + Duration::days(1);
    let mut head: Vec<((usize, u8, i64), SyncParse)> = keyed
        .into_iter()
        .map(|(nil, p)| {
            let (class, dist) = match evaluator.evaluate(&p.target, anchor) {
                Ok(TemporalObject::Span(s)) if s.extent.is_none() => {
                    if s.end <= day_start {
                        (0, (day_start - s.end).num_seconds())
                    } else {
                        (2, (s.start - day_end).num_seconds().max(0))
                    }
                }
                Ok(_) => (1, 0),
                Err(_) => (3, 0),
            };
            ((nil, class, dist), p)
        })
        .collect();
    head.sort_by(|(ka, a), (kb, b)| ka.cmp(kb).then_with(|| a.rules.cmp(&b.rules)));
    head.into_iter()
        .map(|(_, p)| p)
        .chain(rest.into_iter().map(|(_, p)| p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;
    use crate::parser::{parse, tokenize};

    #[test]
    fn earlier_reading_wins() {
        // the later reading comes first in the file
        let g = load_grammar(
            "[Field] ||| [Int:1-31]~1 de marzo ||| MonthOfYear 3 DayOfMonth [Int:1-31]~1\n\
             [TimeSpan] ||| [Field]~1 ||| FindLater Present [Field]~1\n\
             [TimeSpan] ||| [Field]~1 ||| FindEarlier Present [Field]~1\n",
        )
        .unwrap();
        let parses = parse(&tokenize("6 de marzo"), &g).unwrap();
        assert_eq!(parses.len(), 2);
        let anchor = Anchor::ymd(2013, 4, 10).unwrap();
        let ranked = rank_parses(parses, anchor);
        let ev = Evaluator::default();
        let best = ev.evaluate(&ranked[0].target, anchor).unwrap();
        assert_eq!(ev.to_timeml(&best), "2013-03-06");
        let other = ev.evaluate(&ranked[1].target, anchor).unwrap();
        assert_eq!(ev.to_timeml(&other), "2014-03-06");
    }

    #[test]
    fn fewer_nil_tokens_win() {
        let g = load_grammar(
            "[Nil] ||| el ||| _\n\
             [Period] ||| [Nil]~1 [Period]~2 ||| [Period]~2 [Nil]~1\n\
             [Period] ||| el día ||| Simple 1 Days\n\
             [Period] ||| día ||| Simple 1 Days\n",
        )
        .unwrap();
        let parses = parse(&tokenize("el día"), &g).unwrap();
        assert_eq!(parses.len(), 2);
        let counts: Vec<usize> = parses.iter().map(SyncParse::nil_tokens).collect();
        let ranked = rank_parses(parses, Anchor::ymd(2013, 4, 10).unwrap());
        assert_eq!(ranked[0].nil_tokens(), *counts.iter().min().unwrap());
        assert_eq!(ranked[0].nil_tokens(), 0);
    }

    #[test]
    fn singleton_is_unchanged() {
        let g = load_grammar("[Period] ||| día ||| Simple 1 Days\n").unwrap();
        let parses = parse(&tokenize("día"), &g).unwrap();
        assert_eq!(rank_parses(parses.clone(), Anchor::ymd(2013, 4, 10).unwrap()), parses);
    }
}
