//! TimeML ingestion.

use std::ops::Range;

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use thiserror::Error;

use crate::parser::tokenize;
use crate::timex::{Anchor, Timex, TimexType};

use super::tabulated::{Entity, TabulatedDocument};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldDocument {
    pub doc_id: String,
    pub anchor: Anchor,
    pub text: String,
    /// Gold timexes; `span` is unset (`0..0`) until projected onto tokens.
    pub timexes: Vec<Timex>,
}

#[derive(Debug, Clone, Default)]
pub struct TimemlOptions {
    /// Keep the creation-time expression and all text outside `<TEXT>`.
    pub include_dct: bool,
    /// Used when the document has no `<DOCID>` element.
    pub doc_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimemlError {
    #[error("malformed markup at byte {position}: {reason}")]
    Markup { position: u64, reason: String },
    #[error("no TIMEX3 with functionInDocument=\"CREATION_TIME\"")]
    MissingCreationTime,
    #[error("bad creation time: {0}")]
    BadCreationTime(String),
    #[error("TIMEX3 {tid}: unknown type `{kind}`")]
    UnknownType { tid: String, kind: String },
    #[error("nested TIMEX3 elements")]
    Nested,
    #[error("document has no identifier")]
    MissingDocId,
}

struct Open {
    kind: TimexType,
    value: Option<String>,
    dct: bool,
    full_start: usize,
    body_start: Option<usize>,
}

struct Found {
    kind: TimexType,
    value: Option<String>,
    dct: bool,
    full: Range<usize>,
    body: Option<Range<usize>>,
}

fn attr(e: &BytesStart<'_>, name: &str, pos: u64) -> Result<Option<String>, TimemlError> {
    let markup = |reason: String| TimemlError::Markup { position: pos, reason };
    for a in e.attributes() {
        let a = a.map_err(|x| markup(x.to_string()))?;
        if a.key.as_ref() == name {
            return Ok(Some(a.normalized_value(XmlVersion::Implicit1_0).map_err(|x| markup(x.to_string()))?.into_owned()));
        }
    }
    Ok(None)
}

/// Reads a TimeML document. Character spans are byte offsets into the
/// markup-free text. Without `include_dct`, only the `<TEXT>` element is
/// kept when present, and the creation-time expression is never a gold
/// timex.
pub fn read_timeml(doc: &str, options: &TimemlOptions) -> Result<GoldDocument, TimemlError> {
    let mut reader = Reader::from_str(doc);
    let mut full = String::new();
    let mut body = String::new();
    let mut in_body = false;
    let mut saw_body = false;
    let mut in_docid = false;
    let mut docid = String::new();
    let mut open: Option<Open> = None;
    let mut found: Vec<Found> = Vec::new();
    let mut anchor: Option<Anchor> = None;

    let push_text = |s: &str, full: &mut String, body: &mut String, in_body: bool| {
        full.push_str(s);
        if in_body {
            body.push_str(s);
        }
    };

    loop {
        let pos = reader.buffer_position();
        let markup = |reason: String| TimemlError::Markup { position: pos, reason };
        let event = reader.read_event().map_err(|e| markup(e.to_string()))?;
        match event {
            Event::Eof => break,
            Event::Start(e) => match e.local_name().as_ref() {
                "TEXT" => {
                    in_body = true;
                    saw_body = true;
                }
                "DOCID" => in_docid = true,
                "TIMEX3" => {
                    if open.is_some() {
                        return Err(TimemlError::Nested);
                    }
                    let tid = attr(&e, "tid", pos)?.unwrap_or_default();
                    let kind_raw = attr(&e, "type", pos)?.unwrap_or_default();
                    let kind = kind_raw.parse().map_err(|_| TimemlError::UnknownType {
                        tid: tid.clone(),
                        kind: kind_raw,
                    })?;
                    let dct = attr(&e, "functionInDocument", pos)?.as_deref() == Some("CREATION_TIME");
                    let value = attr(&e, "value", pos)?;
                    if dct {
                        let v = value.clone().unwrap_or_default();
                        anchor = Some(Anchor::parse(&v).map_err(|_| TimemlError::BadCreationTime(v))?);
                    }
                    open = Some(Open {
                        kind,
                        value,
                        dct,
                        full_start: full.len(),
                        body_start: in_body.then_some(body.len()),
                    });
                }
                _ => {}
            },
            Event::Empty(e) if e.local_name().as_ref() == "TIMEX3" => {
                // an empty creation-time element still provides the anchor
                if attr(&e, "functionInDocument", pos)?.as_deref() == Some("CREATION_TIME") {
                    let v = attr(&e, "value", pos)?.unwrap_or_default();
                    anchor = Some(Anchor::parse(&v).map_err(|_| TimemlError::BadCreationTime(v))?);
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                "TEXT" => in_body = false,
                "DOCID" => in_docid = false,
                "TIMEX3" => {
                    let o = open.take().ok_or_else(|| markup("unmatched </TIMEX3>".into()))?;
                    found.push(Found {
                        kind: o.kind,
                        value: o.value,
                        dct: o.dct,
                        full: o.full_start..full.len(),
                        body: o.body_start.map(|s| s..body.len()),
                    });
                }
                _ => {}
            },
            Event::Text(t) => {
                let s = t.xml10_content();
                if in_docid {
                    docid.push_str(&s);
                }
                push_text(&s, &mut full, &mut body, in_body);
            }
            Event::CData(t) => {
                let s = t.xml10_content();
                push_text(&s, &mut full, &mut body, in_body);
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref().map_err(|e| markup(e.to_string()))? {
                    Some(c) => c.to_string(),
                    None => {
                        let name = r.xml10_content();
                        resolve_predefined_entity(&name)
                            .ok_or_else(|| markup(format!("unknown entity &{name};")))?
                            .to_string()
                    }
                };
                if in_docid {
                    docid.push_str(&resolved);
                }
                push_text(&resolved, &mut full, &mut body, in_body);
            }
            _ => {}
        }
    }
    if open.is_some() {
        return Err(TimemlError::Markup {
            position: reader.buffer_position(),
            reason: "unclosed TIMEX3".into(),
        });
    }
    let anchor = anchor.ok_or(TimemlError::MissingCreationTime)?;
    let doc_id = match docid.trim() {
        "" => options.doc_id.clone().ok_or(TimemlError::MissingDocId)?,
        id => id.to_string(),
    };

    let use_body = saw_body && !options.include_dct;
    let text = if use_body { body } else { full };
    let timexes = found
        .into_iter()
        .filter(|f| options.include_dct || !f.dct)
        .filter_map(|f| {
            let span = if use_body { f.body? } else { f.full };
            if span.is_empty() {
                return None;
            }
            Some(Timex {
                doc_id: doc_id.clone(),
                span: 0..0,
                text: text[span.clone()].to_string(),
                char_span: span,
                kind: f.kind,
                value: f.value,
            })
        })
        .collect();
    Ok(GoldDocument {
        doc_id,
        anchor,
        text,
        timexes,
    })
}

/// Tokenizes the text and projects gold timexes onto tokens: a token
/// belongs to a timex when their character spans overlap. A timex that
/// would share a token with an earlier one, or covers no token, is dropped;
/// the number dropped is returned with the document.
pub fn to_tabulated(gold: &GoldDocument) -> (TabulatedDocument, usize) {
    let tokens = tokenize(&gold.text);
    let mut owner: Vec<Option<usize>> = vec![None; tokens.len()];
    let mut entities = Vec::new();
    let mut dropped = 0;
    for (k, t) in gold.timexes.iter().enumerate() {
        let covered: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, tok)| tok.char_span.start < t.char_span.end && t.char_span.start < tok.char_span.end)
            .map(|(i, _)| i)
            .collect();
        if covered.is_empty() || covered.iter().any(|i| owner[*i].is_some()) {
            log::warn!("{}: gold timex {:?} dropped in token projection", gold.doc_id, t.text);
            dropped += 1;
            continue;
        }
        for i in &covered {
            owner[*i] = Some(k);
        }
        entities.push(Entity {
            span: covered[0]..covered[covered.len() - 1] + 1,
            kind: t.kind,
            value: t.value.clone(),
        });
    }
    entities.sort_by_key(|e| e.span.start);
    let doc = TabulatedDocument::from_entities(
        gold.doc_id.clone(),
        gold.anchor,
        tokens.into_iter().map(|t| t.text).collect(),
        &entities,
    );
    (doc, dropped)
}
