use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};

use timex_core::corpus::{read_tabulated, write_tabulated, TabulatedDocument};
use timex_core::evaluator::evaluate_tabulated;
use timex_core::pipeline::{
    load_grammar_file, read_inputs, write_document_atomic, DetectionSource, DocumentResult, InputError, Summary,
};
use timex_core::{Anchor, Grammar, Language, Mode, Normalizer, Pipeline, PipelineConfig};

/// Temporal expression detection, normalization and evaluation.
#[derive(Parser)]
#[command(name = "timexkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize timex strings, or fill the value column of a tabulated file.
    Normalize(NormalizeArgs),
    /// Tag documents with the baseline detector or external predictions.
    Detect(DetectArgs),
    /// Detect and normalize a corpus, one output file per document.
    Pipeline(PipelineArgs),
    /// Score predictions against gold annotations.
    Evaluate(EvaluateArgs),
    /// Load a grammar and report problems.
    GrammarCheck(GrammarCheckArgs),
    /// Convert TimeML documents to the tabulated format.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct LangArgs {
    /// Default language; documents may override it with a `# lang` header.
    #[arg(long, default_value = "es")]
    lang: Language,
    /// Grammar file instead of the bundled one.
    #[arg(long)]
    grammar: Option<PathBuf>,
}

#[derive(Args)]
struct NormalizeArgs {
    #[command(flatten)]
    lang: LangArgs,
    /// Anchor date (YYYY-MM-DD or YYYY-MM-DDTHH:MM[:SS]) for TEXT arguments.
    #[arg(long)]
    anchor: Option<Anchor>,
    /// Tabulated file whose tagged entities are normalized.
    #[arg(long, conflicts_with = "text")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "xtn-d")]
    mode: Mode,
    /// Output file for tabulated input (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also print the timex type.
    #[arg(long)]
    with_type: bool,
    text: Vec<String>,
}

#[derive(Args)]
struct DetectionArgs {
    /// Lexicon for the baseline detector instead of the bundled one.
    #[arg(long, conflicts_with = "predictions")]
    lexicon: Option<PathBuf>,
    /// Tabulated detector output to use instead of the baseline detector.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Keep the document creation time and the whole TimeML document.
    #[arg(long)]
    include_dct: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    lang: LangArgs,
    #[command(flatten)]
    detection: DetectionArgs,
    /// Tabulated or TimeML file, or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    lang: LangArgs,
    #[command(flatten)]
    detection: DetectionArgs,
    #[arg(long, default_value = "xtn-d")]
    mode: Mode,
    /// Tabulated or TimeML file, or a directory of them.
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving one tabulated file per document.
    #[arg(long)]
    output: PathBuf,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Gold tabulated or TimeML file or directory.
    #[arg(long)]
    gold: PathBuf,
    /// Predicted tabulated file or directory.
    #[arg(long)]
    pred: PathBuf,
    /// Write a JSON report with metrics and every error instance.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    include_dct: bool,
}

#[derive(Args)]
struct GrammarCheckArgs {
    grammar: PathBuf,
    /// Language the grammar must declare, if it declares one.
    #[arg(long)]
    lang: Option<Language>,
}

#[derive(Args)]
struct ConvertArgs {
    /// TimeML file or directory.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    include_dct: bool,
}

/// Failure with its exit status: 1 for usage and configuration, 2 for data.
struct Failure {
    code: u8,
    message: String,
}

fn config(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

fn data(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn input_failure(e: InputError) -> Failure {
    match e {
        InputError::Io { .. } => config(e),
        InputError::Format { .. } => data(e),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn pipeline_for(lang: &LangArgs, detection: Option<&DetectionArgs>, mode: Mode) -> Result<Pipeline, Failure> {
    let source = match detection {
        Some(DetectionArgs {
            predictions: Some(p), ..
        }) => DetectionSource::External { predictions: p.clone() },
        Some(d) => DetectionSource::Baseline {
            lexicon: d.lexicon.clone(),
        },
        None => DetectionSource::Baseline { lexicon: None },
    };
    let cfg = PipelineConfig {
        language: lang.lang,
        mode,
        grammar: lang.grammar.clone(),
        detection: source,
        include_dct: detection.is_some_and(|d| d.include_dct),
        output: PathBuf::new(),
        workers: 0,
    };
    Pipeline::from_config(&cfg).map_err(config)
}

fn collect(results: Vec<DocumentResult>) -> (Vec<TabulatedDocument>, Summary) {
    let mut docs = Vec::with_capacity(results.len());
    let mut total = Summary::default();
    for r in results {
        match r {
            Ok((doc, s)) => {
                total.merge(&s);
                docs.push(doc);
            }
            Err(e) => {
                error!("{e}");
                total.documents += 1;
                total.failed_documents += 1;
            }
        }
    }
    (docs, total)
}

fn cmd_normalize(args: NormalizeArgs) -> Result<(), Failure> {
    if let Some(input) = &args.input {
        let pipeline = pipeline_for(&args.lang, None, args.mode)?;
        let text = fs::read_to_string(input).map_err(|e| config(format!("cannot read {}: {e}", input.display())))?;
        let docs = read_tabulated(&text).map_err(|e| data(format!("{}: {e}", input.display())))?;
        let (out, summary) = collect(pipeline.run_with(&docs, 0, Pipeline::normalize).map_err(config)?);
        eprintln!("{summary}");
        emit(args.output.as_deref(), &write_tabulated(&out))?;
        return if summary.failed_documents > 0 {
            Err(data(format!("{} documents failed", summary.failed_documents)))
        } else {
            Ok(())
        };
    }
    if args.text.is_empty() {
        return Err(config("give TEXT arguments or --input"));
    }
    let anchor = args.anchor.ok_or_else(|| config("--anchor is required for TEXT arguments"))?;
    let grammar = match &args.lang.grammar {
        Some(path) => load_grammar_file(path, args.lang.lang).map_err(config)?,
        None => args.lang.lang.grammar(),
    };
    let normalizer = Normalizer::new(grammar);
    let mut out = String::new();
    for text in &args.text {
        let line = match normalizer.normalize(text, anchor) {
            Ok(n) if args.with_type => format!("{}\t{}", n.value, n.kind),
            Ok(n) => n.value,
            Err(e) if e.is_parse_failure() => "PARSE_FAIL".to_string(),
            Err(e) => {
                warn!("`{text}`: {e}");
                "EVAL_FAIL".to_string()
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    emit(None, &out)
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    let pipeline = pipeline_for(&args.lang, Some(&args.detection), Mode::DetectionFocused)?;
    let docs = read_inputs(&args.input, args.detection.include_dct).map_err(input_failure)?;
    let (out, summary) = collect(pipeline.run_with(&docs, 0, Pipeline::detect).map_err(config)?);
    eprintln!("{summary}");
    emit(args.output.as_deref(), &write_tabulated(&out))?;
    if summary.failed_documents > 0 {
        return Err(data(format!("{} documents failed", summary.failed_documents)));
    }
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), Failure> {
    let pipeline = pipeline_for(&args.lang, Some(&args.detection), args.mode)?;
    fs::create_dir_all(&args.output).map_err(|e| config(format!("cannot create {}: {e}", args.output.display())))?;
    let docs = read_inputs(&args.input, args.detection.include_dct).map_err(input_failure)?;
    let (out, summary) = collect(pipeline.run(&docs, args.workers).map_err(config)?);
    for doc in &out {
        let path = write_document_atomic(&args.output, doc)
            .map_err(|e| config(format!("cannot write into {}: {e}", args.output.display())))?;
        info!("wrote {}", path.display());
    }
    eprintln!("{} ({})", summary, pipeline.mode);
    if summary.failed_documents > 0 {
        return Err(data(format!("{} documents failed", summary.failed_documents)));
    }
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let gold = read_inputs(&args.gold, args.include_dct).map_err(input_failure)?;
    let pred = read_inputs(&args.pred, args.include_dct).map_err(input_failure)?;
    let report = evaluate_tabulated(&gold, &pred).map_err(data)?;
    emit(None, &report.table())?;
    if let Some(path) = &args.report {
        fs::write(path, report.to_json()).map_err(|e| config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_grammar_check(args: GrammarCheckArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.grammar)
        .map_err(|e| config(format!("cannot read {}: {e}", args.grammar.display())))?;
    let grammar = Grammar::parse_named(&args.grammar.display().to_string(), &text)
        .map_err(|e| data(format!("{}: {e}", args.grammar.display())))?;
    if let Some(lang) = args.lang {
        load_grammar_file(&args.grammar, lang).map_err(data)?;
    }
    let diagnostics = grammar.validate();
    let mut out = String::new();
    for d in &diagnostics {
        out.push_str(&format!("{d}\n"));
    }
    out.push_str(&format!(
        "{}: {} rules, {} warnings\n",
        args.grammar.display(),
        grammar.len(),
        diagnostics.len()
    ));
    emit(None, &out)
}

fn cmd_convert(args: ConvertArgs) -> Result<(), Failure> {
    let docs = read_inputs(&args.input, args.include_dct).map_err(input_failure)?;
    emit(args.output.as_deref(), &write_tabulated(&docs))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Normalize(a) => cmd_normalize(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::GrammarCheck(a) => cmd_grammar_check(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
