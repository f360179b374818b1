//! Token-per-line documents: `token<TAB>tag<TAB>value`, preceded by
//! `# doc_id = ...`, `# anchor = ...` and optionally `# lang = ...` header
//! lines. A blank line ends a document. `-` stands for no value.

use std::ops::Range;

use thiserror::Error;

use crate::detection::{decode_tag_spans, encode_spans, BioTag};
use crate::parser::Token;
use crate::timex::{Anchor, Timex, TimexType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub token: String,
    pub tag: BioTag,
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedDocument {
    pub doc_id: String,
    pub anchor: Anchor,
    pub lang: Option<String>,
    pub rows: Vec<Row>,
}

/// A tagged entity of a tabulated document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub span: Range<usize>,
    pub kind: TimexType,
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct TabulatedError {
    pub line: usize,
    pub reason: String,
}

impl TabulatedDocument {
    /// Builds a document from tokens and non-overlapping entities.
    pub fn from_entities(doc_id: impl Into<String>, anchor: Anchor, tokens: Vec<String>, entities: &[Entity]) -> Self {
        let spans: Vec<(Range<usize>, TimexType)> = entities.iter().map(|e| (e.span.clone(), e.kind)).collect();
        let tags = encode_spans(tokens.len(), &spans);
        let mut values: Vec<Option<String>> = vec![None; tokens.len()];
        for e in entities {
            for v in &mut values[e.span.clone()] {
                v.clone_from(&e.value);
            }
        }
        let rows = tokens
            .into_iter()
            .zip(tags)
            .zip(values)
            .map(|((token, tag), value)| Row { token, tag, value })
            .collect();
        TabulatedDocument {
            doc_id: doc_id.into(),
            anchor,
            lang: None,
            rows,
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.token.as_str()).collect()
    }

    pub fn tags(&self) -> Vec<BioTag> {
        self.rows.iter().map(|r| r.tag).collect()
    }

    /// Entities decoded from the tag column; each takes the value of its
    /// first token.
    pub fn entities(&self) -> Vec<Entity> {
        decode_tag_spans(&self.tags())
            .0
            .into_iter()
            .map(|(span, kind)| Entity {
                value: self.rows[span.start].value.clone(),
                span,
                kind,
            })
            .collect()
    }

    /// The tokens joined by single spaces, with their byte spans.
    pub fn text_and_tokens(&self) -> (String, Vec<Token>) {
        let mut text = String::new();
        let mut tokens = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.len();
            text.push_str(&r.token);
            tokens.push(Token::new(r.token.clone(), start..text.len()));
        }
        (text, tokens)
    }

    /// Entities as timexes over the space-joined token text.
    pub fn timexes(&self) -> Vec<Timex> {
        let (text, tokens) = self.text_and_tokens();
        self.entities()
            .into_iter()
            .map(|e| {
                let chars = tokens[e.span.start].char_span.start..tokens[e.span.end - 1].char_span.end;
                Timex {
                    doc_id: self.doc_id.clone(),
                    span: e.span,
                    text: text[chars.clone()].to_string(),
                    char_span: chars,
                    kind: e.kind,
                    value: e.value,
                }
            })
            .collect()
    }

    /// Checks tag sequence validity and value-column consistency.
    pub fn validate(&self) -> Result<(), TabulatedError> {
        let mut prev: Option<&Row> = None;
        for (i, row) in self.rows.iter().enumerate() {
            check_row(row, prev).map_err(|reason| TabulatedError { line: i + 1, reason })?;
            prev = Some(row);
        }
        Ok(())
    }
}

fn check_row(row: &Row, prev: Option<&Row>) -> Result<(), String> {
    if !row.tag.may_follow(prev.map(|p| p.tag)) {
        return Err(format!(
            "{} may not follow {}",
            row.tag,
            prev.map_or("the document start".to_string(), |p| p.tag.to_string())
        ));
    }
    match row.tag {
        BioTag::O if row.value.is_some() => Err("O token with a value".into()),
        BioTag::I(_) if prev.is_some_and(|p| p.value != row.value) => {
            Err("value differs from the rest of its entity".into())
        }
        _ => Ok(()),
    }
}

/// Reads every document in `text`.
pub fn read_tabulated(text: &str) -> Result<Vec<TabulatedDocument>, TabulatedError> {
    read_documents(text, true)
}

/// Like [`read_tabulated`] but accepts invalid tag sequences and value
/// columns, for detector output that is repaired afterwards.
pub fn read_tabulated_lenient(text: &str) -> Result<Vec<TabulatedDocument>, TabulatedError> {
    read_documents(text, false)
}

fn read_documents(text: &str, strict: bool) -> Result<Vec<TabulatedDocument>, TabulatedError> {
    struct Partial {
        doc_id: Option<String>,
        anchor: Option<Anchor>,
        lang: Option<String>,
        rows: Vec<Row>,
        header_line: usize,
    }
    fn finish(p: Partial) -> Result<TabulatedDocument, TabulatedError> {
        let missing = |what: &str| TabulatedError {
            line: p.header_line,
            reason: format!("document without `# {what} = ...` header"),
        };
        Ok(TabulatedDocument {
            doc_id: p.doc_id.clone().ok_or_else(|| missing("doc_id"))?,
            anchor: p.anchor.ok_or_else(|| missing("anchor"))?,
            lang: p.lang,
            rows: p.rows,
        })
    }

    let mut docs = Vec::new();
    let mut cur: Option<Partial> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |reason: String| TabulatedError { line: line_no, reason };
        if line.is_empty() {
            if let Some(p) = cur.take() {
                docs.push(finish(p)?);
            }
            continue;
        }
        let p = cur.get_or_insert_with(|| Partial {
            doc_id: None,
            anchor: None,
            lang: None,
            rows: Vec::new(),
            header_line: line_no,
        });
        if let Some(header) = line.strip_prefix("# ") {
            if !p.rows.is_empty() {
                return Err(err("header line after token rows; separate documents with a blank line".into()));
            }
            let (key, value) = header
                .split_once(" = ")
                .ok_or_else(|| err(format!("malformed header `{line}`")))?;
            let slot_taken = match key {
                "doc_id" => p.doc_id.replace(value.to_string()).is_some(),
                "anchor" => p
                    .anchor
                    .replace(Anchor::parse(value).map_err(|e| err(e.to_string()))?)
                    .is_some(),
                "lang" => p.lang.replace(value.to_string()).is_some(),
                other => return Err(err(format!("unknown header `{other}`"))),
            };
            if slot_taken {
                return Err(err(format!("repeated `{key}` header")));
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(err(format!("expected 3 tab-separated columns, found {}", cols.len())));
        }
        if p.doc_id.is_none() {
            return Err(err("token row before the `# doc_id = ...` header".into()));
        }
        let tag: BioTag = cols[1].parse().map_err(|e: crate::detection::BioTagError| err(e.to_string()))?;
        let row = Row {
            token: cols[0].to_string(),
            tag,
            value: (cols[2] != "-").then(|| cols[2].to_string()),
        };
        if strict {
            check_row(&row, p.rows.last()).map_err(err)?;
        }
        p.rows.push(row);
    }
    if let Some(p) = cur {
        docs.push(finish(p)?);
    }
    Ok(docs)
}

pub fn write_document(doc: &TabulatedDocument, out: &mut String) {
    out.push_str("# doc_id = ");
    out.push_str(&doc.doc_id);
    out.push_str("\n# anchor = ");
    out.push_str(&doc.anchor.to_string());
    out.push('\n');
    if let Some(lang) = &doc.lang {
        out.push_str("# lang = ");
        out.push_str(lang);
        out.push('\n');
    }
    for r in &doc.rows {
        out.push_str(&r.token);
        out.push('\t');
        out.push_str(&r.tag.to_string());
        out.push('\t');
        out.push_str(r.value.as_deref().unwrap_or("-"));
        out.push('\n');
    }
    out.push('\n');
}

pub fn write_tabulated(docs: &[TabulatedDocument]) -> String {
    let mut out = String::new();
    for d in docs {
        write_document(d, &mut out);
    }
    out
}
