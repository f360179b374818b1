//! Python bindings for the timex normalization and evaluation library.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use timex_core::corpus::{read_tabulated, read_timeml, to_tabulated, write_tabulated, TimemlOptions};
use timex_core::pipeline::{load_grammar_file, Summary};
use timex_core::{Anchor, Language, Mode, NormalizeError};

create_exception!(timexkit, ParseError, PyException, "No complete parse covers the input.");
create_exception!(timexkit, EvaluationError, PyException, "A parse was found but could not be evaluated.");

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn language(code: &str) -> PyResult<Language> {
    code.parse().map_err(value_err)
}

fn anchor(text: &str) -> PyResult<Anchor> {
    Anchor::parse(text).map_err(value_err)
}

/// Splits text into the tokens the parser sees.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    timex_core::tokenize(text).into_iter().map(|t| t.text).collect()
}

/// Returns `(shape, granularity, underspecified)` for a TimeML value.
#[pyfunction]
fn classify_value(value: &str) -> (String, String, bool) {
    let v = timex_core::classify_value(value);
    (format!("{:?}", v.shape), v.granularity.to_string(), v.underspecified)
}

#[pyfunction]
fn canonicalize_value(value: &str) -> String {
    timex_core::canonicalize_value(value)
}

#[pyfunction]
fn values_equivalent(a: &str, b: &str) -> bool {
    timex_core::values_equivalent(a, b)
}

/// A synchronous grammar.
#[pyclass(module = "timexkit", frozen)]
struct Grammar {
    inner: timex_core::Grammar,
}

#[pymethods]
impl Grammar {
    #[new]
    #[pyo3(signature = (text, name = "<inline>"))]
    fn new(text: &str, name: &str) -> PyResult<Self> {
        let inner = timex_core::Grammar::parse_named(name, text).map_err(value_err)?;
        Ok(Grammar { inner })
    }

    #[staticmethod]
    fn bundled(lang: &str) -> PyResult<Self> {
        Ok(Grammar {
            inner: language(lang)?.grammar(),
        })
    }

    /// Loads a grammar file, checking its `#! lang` directive against `lang`.
    #[staticmethod]
    fn from_file(path: &str, lang: &str) -> PyResult<Self> {
        let inner = load_grammar_file(path.as_ref(), language(lang)?).map_err(value_err)?;
        Ok(Grammar { inner })
    }

    #[getter]
    fn lang(&self) -> Option<String> {
        self.inner.config.lang.clone()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    /// Warnings about unreachable labels, dead literals and duplicate rules.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    /// Every derivation of `text` as `(source, target)` bracketed trees.
    fn parse(&self, text: &str) -> PyResult<Vec<(String, String)>> {
        let parses = timex_core::parse(&timex_core::tokenize(text), &self.inner)
            .map_err(|e| ParseError::new_err(e.to_string()))?;
        Ok(parses
            .iter()
            .map(|p| (p.source.bracketed(), p.target.bracketed()))
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("<Grammar {} ({} rules)>", self.inner.name(), self.inner.len())
    }
}

/// Result of normalizing one timex string.
#[pyclass(module = "timexkit", frozen, get_all)]
struct Normalized {
    value: String,
    #[pyo3(name = "type")]
    kind: String,
    source: String,
    target: String,
}

#[pymethods]
impl Normalized {
    fn __repr__(&self) -> String {
        format!("<Normalized {} {}>", self.value, self.kind)
    }
}

#[pyclass(module = "timexkit", frozen)]
struct Normalizer {
    inner: timex_core::Normalizer,
}

#[pymethods]
impl Normalizer {
    #[new]
    fn new(grammar: &Grammar) -> Self {
        Normalizer {
            inner: timex_core::Normalizer::new(grammar.inner.clone()),
        }
    }

    #[staticmethod]
    fn bundled(lang: &str) -> PyResult<Self> {
        Ok(Normalizer {
            inner: timex_core::Normalizer::new(language(lang)?.grammar()),
        })
    }

    /// Normalizes `text` against an anchor date such as `"2013-04-10"`.
    fn normalize(&self, py: Python<'_>, text: &str, anchor_date: &str) -> PyResult<Normalized> {
        let a = anchor(anchor_date)?;
        let result = py.detach(|| self.inner.normalize(text, a));
        match result {
            Ok(n) => Ok(Normalized {
                value: n.value,
                kind: n.kind.to_string(),
                source: n.parse.source.bracketed(),
                target: n.parse.target.bracketed(),
            }),
            Err(NormalizeError::Parse(e)) => Err(ParseError::new_err(e.to_string())),
            Err(e) => Err(EvaluationError::new_err(e.to_string())),
        }
    }
}

fn summary_dict<'py>(py: Python<'py>, s: &Summary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("documents", s.documents)?;
    d.set_item("failed_documents", s.failed_documents)?;
    d.set_item("detected", s.detected)?;
    d.set_item("normalized", s.normalized)?;
    d.set_item("parse_failures", s.parse_failures)?;
    d.set_item("evaluation_failures", s.evaluation_failures)?;
    d.set_item("dropped", s.dropped)?;
    d.set_item("repairs", s.repairs)?;
    Ok(d)
}

/// Detection plus normalization over tabulated documents.
#[pyclass(module = "timexkit", frozen)]
struct Pipeline {
    inner: timex_core::Pipeline,
}

#[pymethods]
impl Pipeline {
    #[new]
    #[pyo3(signature = (lang = "es", mode = "xtn-d"))]
    fn new(lang: &str, mode: &str) -> PyResult<Self> {
        let mode: Mode = mode.parse().map_err(value_err)?;
        Ok(Pipeline {
            inner: timex_core::Pipeline::bundled(language(lang)?, mode),
        })
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.name()
    }

    /// Runs both stages over tabulated text and returns the tabulated output
    /// and a summary dict. Raises on the first failed document.
    #[pyo3(signature = (tabulated, workers = 0))]
    fn process<'py>(&self, py: Python<'py>, tabulated: &str, workers: usize) -> PyResult<(String, Bound<'py, PyDict>)> {
        let docs = read_tabulated(tabulated).map_err(value_err)?;
        let results = py.detach(|| self.inner.run(&docs, workers)).map_err(value_err)?;
        let mut out = Vec::with_capacity(results.len());
        let mut total = Summary::default();
        for r in results {
            let (doc, s) = r.map_err(value_err)?;
            total.merge(&s);
            out.push(doc);
        }
        Ok((write_tabulated(&out), summary_dict(py, &total)?))
    }
}

/// Converts a TimeML document to tabulated text.
#[pyfunction]
#[pyo3(signature = (xml, include_dct = false, doc_id = None))]
fn timeml_to_tabulated(xml: &str, include_dct: bool, doc_id: Option<String>) -> PyResult<String> {
    let gold = read_timeml(xml, &TimemlOptions { include_dct, doc_id }).map_err(value_err)?;
    let (doc, _) = to_tabulated(&gold);
    Ok(write_tabulated(&[doc]))
}

/// Scores predicted against gold tabulated text. Returns the metrics dict
/// and the printable report.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, gold: &str, pred: &str) -> PyResult<(Bound<'py, PyDict>, String)> {
    let gold = read_tabulated(gold).map_err(value_err)?;
    let pred = read_tabulated(pred).map_err(value_err)?;
    let report = timex_core::evaluate_tabulated(&gold, &pred).map_err(value_err)?;
    let m = &report.metrics;
    let d = PyDict::new(py);
    for (k, v) in [
        ("strict_p", m.strict_p),
        ("strict_r", m.strict_r),
        ("strict_f1", m.strict_f1),
        ("relaxed_p", m.relaxed_p),
        ("relaxed_r", m.relaxed_r),
        ("relaxed_f1", m.relaxed_f1),
        ("type_f1", m.type_f1),
        ("value_p", m.value_p),
        ("value_r", m.value_r),
        ("value_f1", m.value_f1),
        ("gold_accuracy", m.gold_accuracy),
    ] {
        d.set_item(k, v)?;
    }
    Ok((d, report.table()))
}

#[pymodule]
fn timexkit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("EvaluationError", m.py().get_type::<EvaluationError>())?;
    m.add_class::<Grammar>()?;
    m.add_class::<Normalized>()?;
    m.add_class::<Normalizer>()?;
    m.add_class::<Pipeline>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(classify_value, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize_value, m)?)?;
    m.add_function(wrap_pyfunction!(values_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(timeml_to_tabulated, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
