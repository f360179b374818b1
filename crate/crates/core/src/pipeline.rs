//! Detection followed by normalization over whole documents.
//!
//! Each stage is also usable alone: [`Pipeline::detect`] produces tagged
//! documents without values and [`Pipeline::normalize`] fills values for
//! already-tagged documents. [`Pipeline::run`] is their composition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use thiserror::Error;

use crate::bundled::{Language, UnknownLanguage};
use crate::corpus::{
    read_tabulated, read_tabulated_lenient, read_timeml, to_tabulated, write_document, Entity, TabulatedDocument,
    TimemlOptions,
};
use crate::detection::{baseline_detect, decode_tag_spans, encode_spans, Lexicon, Provenance};
use crate::grammar::Grammar;
use crate::normalizer::Normalizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Keep every detected timex; failed normalizations get no value.
    #[default]
    DetectionFocused,
    /// Drop timexes that do not normalize.
    NormalizationFocused,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DetectionFocused => "xtn-d",
            Mode::NormalizationFocused => "xtn-n",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xtn-d" => Ok(Mode::DetectionFocused),
            "xtn-n" => Ok(Mode::NormalizationFocused),
            _ => Err(format!("unknown mode `{s}` (expected xtn-d or xtn-n)")),
        }
    }
}

/// Where detection tags come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DetectionSource {
    /// The lexicon matcher; `None` uses the bundled lexicon.
    Baseline { lexicon: Option<PathBuf> },
    /// A tabulated file of tagged documents aligned with the input.
    External { predictions: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub language: Language,
    pub mode: Mode,
    /// `None` uses the bundled grammar for the language.
    pub grammar: Option<PathBuf>,
    pub detection: DetectionSource,
    pub include_dct: bool,
    pub output: PathBuf,
    /// 0 means one per core.
    pub workers: usize,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("grammar {path} declares language `{declared}` but the configured language is {configured}")]
    LanguageMismatch {
        path: PathBuf,
        declared: String,
        configured: Language,
    },
    #[error("cannot build worker pool: {0}")]
    Workers(String),
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{doc_id}: {source}")]
    Language {
        doc_id: String,
        #[source]
        source: UnknownLanguage,
    },
    #[error("{doc_id}: no predictions for this document")]
    MissingPredictions { doc_id: String },
    #[error("{doc_id}: predictions have {pred} tokens but the document has {gold}")]
    TokenCount { doc_id: String, gold: usize, pred: usize },
    #[error("{doc_id}: token {index} is `{expected}` but predictions have `{found}`")]
    Token {
        doc_id: String,
        index: usize,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

/// Grammar and lexicon for one language.
#[derive(Debug, Clone)]
pub struct LanguageResources {
    pub normalizer: Normalizer,
    pub lexicon: Lexicon,
}

impl LanguageResources {
    pub fn bundled(lang: Language) -> Self {
        LanguageResources {
            normalizer: Normalizer::new(lang.grammar()),
            lexicon: lang.lexicon(),
        }
    }
}

/// Counts for one document or a whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Summary {
    pub documents: usize,
    pub failed_documents: usize,
    pub detected: usize,
    pub normalized: usize,
    pub parse_failures: usize,
    pub evaluation_failures: usize,
    pub dropped: usize,
    pub repairs: usize,
}

impl Summary {
    pub fn merge(&mut self, other: &Summary) {
        self.documents += other.documents;
        self.failed_documents += other.failed_documents;
        self.detected += other.detected;
        self.normalized += other.normalized;
        self.parse_failures += other.parse_failures;
        self.evaluation_failures += other.evaluation_failures;
        self.dropped += other.dropped;
        self.repairs += other.repairs;
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} documents ({} failed), {} timexes detected, {} normalized, {} parse failures, {} evaluation failures, {} dropped, {} tags repaired",
            self.documents,
            self.failed_documents,
            self.detected,
            self.normalized,
            self.parse_failures,
            self.evaluation_failures,
            self.dropped,
            self.repairs
        )
    }
}

/// Output document and counts, or why the document failed.
pub type DocumentResult = Result<(TabulatedDocument, Summary), DocumentError>;

/// Loaded resources for a run.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub language: Language,
    pub mode: Mode,
    resources: BTreeMap<Language, LanguageResources>,
    predictions: Option<HashMap<String, TabulatedDocument>>,
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a grammar file and checks its declared language, if any.
pub fn load_grammar_file(path: &Path, language: Language) -> Result<Grammar, ConfigError> {
    let text = read_file(path)?;
    let grammar = Grammar::parse_named(&path.display().to_string(), &text).map_err(|e| ConfigError::Invalid {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if let Some(declared) = &grammar.config.lang {
        if declared.parse::<Language>().ok() != Some(language) {
            return Err(ConfigError::LanguageMismatch {
                path: path.to_path_buf(),
                declared: declared.clone(),
                configured: language,
            });
        }
    }
    Ok(grammar)
}

pub fn load_lexicon_file(path: &Path) -> Result<Lexicon, ConfigError> {
    Lexicon::parse(&read_file(path)?).map_err(|e| ConfigError::Invalid {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

impl Pipeline {
    /// Bundled resources for every language, baseline detection.
    pub fn bundled(language: Language, mode: Mode) -> Self {
        let resources = Language::ALL
            .into_iter()
            .map(|l| (l, LanguageResources::bundled(l)))
            .collect();
        Pipeline {
            language,
            mode,
            resources,
            predictions: None,
        }
    }

    /// Replaces the resources used for `language`.
    pub fn with_resources(mut self, language: Language, resources: LanguageResources) -> Self {
        self.resources.insert(language, resources);
        self
    }

    /// Uses the given tagged documents instead of the baseline detector.
    pub fn with_predictions(mut self, predictions: Vec<TabulatedDocument>) -> Self {
        self.predictions = Some(predictions.into_iter().map(|d| (d.doc_id.clone(), d)).collect());
        self
    }

    pub fn from_config(config: &PipelineConfig) -> Result<Self, ConfigError> {
        let mut pipeline = Pipeline::bundled(config.language, config.mode);
        let bundled = pipeline.resources[&config.language].clone();
        let normalizer = match &config.grammar {
            Some(path) => Normalizer::new(load_grammar_file(path, config.language)?),
            None => bundled.normalizer,
        };
        let lexicon = match &config.detection {
            DetectionSource::Baseline { lexicon: Some(path) } => load_lexicon_file(path)?,
            _ => bundled.lexicon,
        };
        pipeline = pipeline.with_resources(config.language, LanguageResources { normalizer, lexicon });
        if let DetectionSource::External { predictions } = &config.detection {
            let text = read_file(predictions)?;
            let docs = read_tabulated_lenient(&text).map_err(|e| ConfigError::Invalid {
                path: predictions.clone(),
                reason: e.to_string(),
            })?;
            pipeline = pipeline.with_predictions(docs);
        }
        Ok(pipeline)
    }

    pub fn provenance(&self) -> Provenance {
        if self.predictions.is_some() {
            Provenance::External
        } else {
            Provenance::Baseline
        }
    }

    fn resources_for(&self, doc: &TabulatedDocument) -> Result<&LanguageResources, DocumentError> {
        let lang = match &doc.lang {
            Some(code) => code.parse().map_err(|source| DocumentError::Language {
                doc_id: doc.doc_id.clone(),
                source,
            })?,
            None => self.language,
        };
        Ok(&self.resources[&lang])
    }

    /// Tags a document's tokens; values are left empty. Input tags are
    /// ignored.
    pub fn detect(&self, doc: &TabulatedDocument) -> Result<(TabulatedDocument, Summary), DocumentError> {
        let tags = match &self.predictions {
            None => baseline_detect(&doc.tokens(), &self.resources_for(doc)?.lexicon),
            Some(preds) => {
                let pred = preds.get(&doc.doc_id).ok_or_else(|| DocumentError::MissingPredictions {
                    doc_id: doc.doc_id.clone(),
                })?;
                check_tokens(doc, pred)?;
                pred.tags()
            }
        };
        let (spans, repairs) = decode_tag_spans(&tags);
        let entities: Vec<Entity> = spans
            .into_iter()
            .map(|(span, kind)| Entity { span, kind, value: None })
            .collect();
        let mut out = TabulatedDocument::from_entities(
            doc.doc_id.clone(),
            doc.anchor,
            doc.tokens().into_iter().map(String::from).collect(),
            &entities,
        );
        out.lang.clone_from(&doc.lang);
        let summary = Summary {
            documents: 1,
            detected: entities.len(),
            repairs,
            ..Summary::default()
        };
        Ok((out, summary))
    }

    /// Fills the value of every tagged entity. In normalization-focused
    /// mode entities that fail are removed.
    pub fn normalize(&self, doc: &TabulatedDocument) -> Result<(TabulatedDocument, Summary), DocumentError> {
        let normalizer = &self.resources_for(doc)?.normalizer;
        let mut summary = Summary {
            documents: 1,
            ..Summary::default()
        };
        let mut entities = Vec::new();
        for (timex, entity) in doc.timexes().into_iter().zip(doc.entities()) {
            match normalizer.normalize(&timex.text, doc.anchor) {
                Ok(n) => {
                    summary.normalized += 1;
                    entities.push(Entity {
                        value: Some(n.value),
                        ..entity
                    });
                }
                Err(e) => {
                    if e.is_parse_failure() {
                        summary.parse_failures += 1;
                    } else {
                        summary.evaluation_failures += 1;
                        warn!("{}: `{}`: {e}", doc.doc_id, timex.text);
                    }
                    match self.mode {
                        Mode::DetectionFocused => entities.push(Entity { value: None, ..entity }),
                        Mode::NormalizationFocused => summary.dropped += 1,
                    }
                }
            }
        }
        let mut out = TabulatedDocument::from_entities(
            doc.doc_id.clone(),
            doc.anchor,
            doc.tokens().into_iter().map(String::from).collect(),
            &entities,
        );
        out.lang.clone_from(&doc.lang);
        Ok((out, summary))
    }

    /// Detection then normalization.
    pub fn process(&self, doc: &TabulatedDocument) -> Result<(TabulatedDocument, Summary), DocumentError> {
        let (tagged, d) = self.detect(doc)?;
        let (out, mut n) = self.normalize(&tagged)?;
        n.detected = d.detected;
        n.repairs = d.repairs;
        Ok((out, n))
    }

    /// Runs `stage` over documents on `workers` threads (0 = one per
    /// core). Results keep input order.
    pub fn run_with<F>(
        &self,
        docs: &[TabulatedDocument],
        workers: usize,
        stage: F,
    ) -> Result<Vec<DocumentResult>, ConfigError>
    where
        F: Fn(&Pipeline, &TabulatedDocument) -> DocumentResult + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ConfigError::Workers(e.to_string()))?;
        Ok(pool.install(|| docs.par_iter().map(|d| stage(self, d)).collect()))
    }

    pub fn run(
        &self,
        docs: &[TabulatedDocument],
        workers: usize,
    ) -> Result<Vec<DocumentResult>, ConfigError> {
        self.run_with(docs, workers, Pipeline::process)
    }
}

fn check_tokens(doc: &TabulatedDocument, pred: &TabulatedDocument) -> Result<(), DocumentError> {
    if let Some(index) = doc.rows.iter().zip(&pred.rows).position(|(a, b)| a.token != b.token) {
        return Err(DocumentError::Token {
            doc_id: doc.doc_id.clone(),
            index,
            expected: doc.rows[index].token.clone(),
            found: pred.rows[index].token.clone(),
        });
    }
    if doc.rows.len() != pred.rows.len() {
        return Err(DocumentError::TokenCount {
            doc_id: doc.doc_id.clone(),
            gold: doc.rows.len(),
            pred: pred.rows.len(),
        });
    }
    Ok(())
}

/// Re-encodes tags so every sequence is valid, returning the repair count.
pub fn repair_tags(doc: &mut TabulatedDocument) -> usize {
    let (spans, repairs) = decode_tag_spans(&doc.tags());
    let tags = encode_spans(doc.rows.len(), &spans);
    for (row, tag) in doc.rows.iter_mut().zip(tags) {
        row.tag = tag;
    }
    repairs
}

fn is_timeml(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("tml" | "xml" | "TML" | "XML")
    )
}

/// Reads one input file. TimeML files (`.tml`, `.xml`) become one
/// tokenized document; anything else is read as tabulated.
pub fn read_input_file(path: &Path, include_dct: bool) -> Result<Vec<TabulatedDocument>, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format = |reason: String| InputError::Format {
        path: path.to_path_buf(),
        reason,
    };
    if is_timeml(path) {
        let options = TimemlOptions {
            include_dct,
            doc_id: path.file_stem().map(|s| s.to_string_lossy().into_owned()),
        };
        let gold = read_timeml(&text, &options).map_err(|e| format(e.to_string()))?;
        let (doc, dropped) = to_tabulated(&gold);
        if dropped > 0 {
            warn!("{}: {dropped} timexes do not align with tokens and were dropped", path.display());
        }
        Ok(vec![doc])
    } else {
        read_tabulated(&text).map_err(|e| format(e.to_string()))
    }
}

/// Reads a file, or every regular file of a directory in name order
/// (hidden files skipped).
pub fn read_inputs(path: &Path, include_dct: bool) -> Result<Vec<TabulatedDocument>, InputError> {
    let io = |source| InputError::Io {
        path: path.to_path_buf(),
        source,
    };
    if !path.is_dir() {
        return read_input_file(path, include_dct);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    files.retain(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')));
    files.sort();
    let mut docs = Vec::new();
    for f in files {
        docs.extend(read_input_file(&f, include_dct)?);
    }
    Ok(docs)
}

/// File name for a document's output.
pub fn output_file_name(doc_id: &str) -> String {
    let safe: String = doc_id
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    format!("{safe}.tsv")
}

/// Writes a document into `dir` through a temporary file that is renamed
/// into place.
pub fn write_document_atomic(dir: &Path, doc: &TabulatedDocument) -> std::io::Result<PathBuf> {
    let mut text = String::new();
    write_document(doc, &mut text);
    let target = dir.join(output_file_name(&doc.doc_id));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}
