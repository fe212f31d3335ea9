//! The `tilt` command. Exit status: 0 on success, 1 when the input is
//! invalid or a domain operation fails, 2 on usage or I/O errors.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tilt_core::canonical::to_value;
use tilt_core::graph::{build_graph_with, classify_controllers, export, ExportFormat, GraphOptions};
use tilt_core::validate::{default_rules, integrity_rules, Ruleset};
use tilt_core::{
    attach_vocabulary, compute_hash, diff, load_vocabulary, new_document, parse, summarize, with_hash, ChangeSet,
    Execution, PathPattern, TiltDocument, ValidationReport, VocabMode, VocabularyBinding,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "tilt", version, about = "Work with TILT transparency documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a document and print the report
    Validate {
        file: PathBuf,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
        /// Also check that meta.hash matches the content
        #[arg(long)]
        verify_hash: bool,
        /// Vocabulary definition to enforce on --vocab-field
        #[arg(long, requires = "vocab_field")]
        vocab: Option<PathBuf>,
        /// Field pattern the vocabulary applies to, e.g. dataDisclosed[*].purposes[*].purpose
        #[arg(long, requires = "vocab")]
        vocab_field: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Strict)]
        vocab_mode: Mode,
    },
    /// Scaffold a new document
    New {
        #[arg(long)]
        name: String,
        #[arg(long)]
        country: String,
        #[arg(long)]
        language: String,
        /// Write to this file instead of standard output
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the content hash of a document
    Hash {
        file: PathBuf,
        /// Store the hash in meta.hash of the file
        #[arg(long)]
        write: bool,
    },
    /// Show the changes from one document to another
    Diff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Summarize a document
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Build the data-sharing graph of a directory of documents
    Graph {
        dir: PathBuf,
        /// Output file, `-` for standard output
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        /// Print the controller classification
        #[arg(long)]
        classify: bool,
        /// Only merge entities whose names match exactly
        #[arg(long)]
        exact_names: bool,
        #[arg(long, value_enum, default_value_t = Exec::Parallel)]
        exec: Exec,
    },
    /// Run the document hub until interrupted
    Serve {
        #[arg(long, env = "TILT_HUB_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Data directory; documents are kept in memory when absent
        #[arg(long, env = "TILT_HUB_DATA")]
        data: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Strict,
    Permissive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Exec {
    Sequential,
    Parallel,
}

enum Failure {
    /// Invalid input; the message goes to the diagnostic stream.
    Invalid(String),
    Usage(String),
}

impl Failure {
    fn io(path: &FsPath, err: std::io::Error) -> Failure {
        Failure::Usage(format!("{}: {err}", path.display()))
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (program name first) against standard
/// output and standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { file, json, verify_hash, vocab, vocab_field, vocab_mode } => {
            validate(out, &file, json, verify_hash, vocab.zip(vocab_field), vocab_mode)
        }
        Command::New { name, country, language, out: file } => scaffold(out, &name, &country, &language, file),
        Command::Hash { file, write } => hash(out, &file, write),
        Command::Diff { a, b, json } => show_diff(out, &a, &b, json),
        Command::Report { file, format } => report(out, &file, format),
        Command::Graph { dir, out: file, format, classify, exact_names, exec } => {
            graph(out, &dir, &file, format, classify, exact_names, exec)
        }
        Command::Serve { addr, data } => serve(addr, data),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_INVALID
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "tilt: {msg}");
            EXIT_USAGE
        }
    }
}

fn read(path: &FsPath) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(path, e))
}

fn load(path: &FsPath) -> Result<TiltDocument, Failure> {
    parse(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> Result<(), Failure> {
    out.write_all(bytes).map_err(|e| Failure::Usage(format!("writing output: {e}")))
}

fn pretty(doc: &TiltDocument) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&to_value(doc)).expect("documents serialize");
    bytes.push(b'\n');
    bytes
}

fn write_file(path: &FsPath, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn print_report(out: &mut dyn Write, report: &ValidationReport, json: bool) -> Outcome {
    let text = if json {
        format!("{}\n", report.to_json())
    } else if report.valid {
        "valid\n".to_string()
    } else {
        let mut text = format!("invalid: {} violation(s)\n", report.violations.len());
        for v in &report.violations {
            text.push_str(&format!("  {v}\n"));
        }
        text
    };
    emit(out, text.as_bytes())?;
    Ok(if report.valid { EXIT_OK } else { EXIT_INVALID })
}

fn validate(
    out: &mut dyn Write,
    file: &FsPath,
    json: bool,
    verify_hash: bool,
    vocab: Option<(PathBuf, String)>,
    mode: Mode,
) -> Outcome {
    let bytes = read(file)?;
    let mut rules = default_rules();
    if verify_hash {
        rules.extend(integrity_rules());
    }
    if let Some((vocab_file, field)) = vocab {
        let pattern: PathPattern = field.parse().map_err(|e| Failure::Usage(format!("--vocab-field: {e}")))?;
        let vocabulary = load_vocabulary(&read(&vocab_file)?)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", vocab_file.display())))?;
        let mode = match mode {
            Mode::Strict => VocabMode::Strict,
            Mode::Permissive => VocabMode::Permissive,
        };
        rules = attach_vocabulary(rules, &VocabularyBinding::new(pattern, vocabulary), mode);
    }
    let ruleset = Ruleset::compile(rules).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = match parse(&bytes) {
        Ok(doc) => ruleset.evaluate(&doc),
        Err(e) => ValidationReport::from_parse_error(&e),
    };
    print_report(out, &report, json)
}

fn scaffold(out: &mut dyn Write, name: &str, country: &str, language: &str, file: Option<PathBuf>) -> Outcome {
    let doc = new_document(name, country, language).map_err(|e| Failure::Invalid(e.to_string()))?;
    let bytes = pretty(&doc);
    match file {
        Some(path) => write_file(&path, &bytes)?,
        None => emit(out, &bytes)?,
    }
    Ok(EXIT_OK)
}

fn hash(out: &mut dyn Write, file: &FsPath, write: bool) -> Outcome {
    let doc = load(file)?;
    let digest = compute_hash(&doc);
    if write {
        write_file(file, &pretty(&with_hash(doc)))?;
    }
    emit(out, format!("{digest}\n").as_bytes())?;
    Ok(EXIT_OK)
}

fn change_lines(changes: &ChangeSet) -> String {
    let mut text = String::new();
    for a in &changes.removed {
        text.push_str(&format!("- {}: {}\n", a.path, a.value));
    }
    for a in &changes.added {
        text.push_str(&format!("+ {}: {}\n", a.path, a.value));
    }
    for c in &changes.changed {
        text.push_str(&format!("~ {}: {} -> {}\n", c.path, c.old_value, c.new_value));
    }
    text
}

fn show_diff(out: &mut dyn Write, a: &FsPath, b: &FsPath, json: bool) -> Outcome {
    let changes = diff(&load(a)?, &load(b)?);
    let text = if json {
        format!("{}\n", serde_json::to_string(&changes).expect("change sets serialize"))
    } else {
        change_lines(&changes)
    };
    emit(out, text.as_bytes())?;
    Ok(EXIT_OK)
}

fn report(out: &mut dyn Write, file: &FsPath, format: ReportFormat) -> Outcome {
    let summary = summarize(&load(file)?);
    let text = match format {
        ReportFormat::Text => summary.to_string(),
        ReportFormat::Json => format!("{}\n", serde_json::to_string_pretty(&summary).expect("summaries serialize")),
    };
    emit(out, text.as_bytes())?;
    Ok(EXIT_OK)
}

fn graph(
    out: &mut dyn Write,
    dir: &FsPath,
    file: &FsPath,
    format: GraphFormat,
    classify: bool,
    exact_names: bool,
    exec: Exec,
) -> Outcome {
    let execution = match exec {
        Exec::Sequential => Execution::Sequential,
        Exec::Parallel => Execution::Parallel,
    };
    let entries = tilt_core::corpus::load_dir(dir, execution).map_err(|e| Failure::io(dir, e))?;
    let mut corpus = Vec::new();
    let mut errors = Vec::new();
    for entry in entries {
        match entry.document {
            Ok(doc) => corpus.push(doc),
            Err(e) => errors.push(format!("{}: {e}", entry.file.display())),
        }
    }
    if !errors.is_empty() {
        return Err(Failure::Invalid(errors.join("\n")));
    }
    let mut options = GraphOptions { execution, ..GraphOptions::default() };
    if exact_names {
        options.resolution.case_fold = false;
        options.resolution.collapse_whitespace = false;
    }
    let graph = build_graph_with(&corpus, options);
    let format = match format {
        GraphFormat::Dot => ExportFormat::Dot,
        GraphFormat::Json => ExportFormat::Json,
    };
    let bytes = export(&graph, format);
    if file == FsPath::new("-") {
        emit(out, &bytes)?;
    } else {
        write_file(file, &bytes)?;
    }
    if classify {
        let mut text = String::new();
        for (id, relationship) in classify_controllers(&graph) {
            let node = graph.node(&id).expect("classified nodes exist");
            let country = node.country.as_deref().unwrap_or("-");
            text.push_str(&format!("{}\t{country}\t{}\n", node.label, relationship.as_str()));
        }
        emit(out, text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn serve(addr: SocketAddr, data: Option<PathBuf>) -> Outcome {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(format!("starting runtime: {e}")))?;
    runtime.block_on(async {
        if data.is_none() {
            log::warn!("no data directory given; documents are kept in memory only");
        }
        let config = tilt_hub::HubConfig { data_dir: data, ..tilt_hub::HubConfig::default() };
        let hub = tilt_hub::Hub::start(config).map_err(|e| match e {
            tilt_hub::HubError::Store(corrupt @ tilt_hub::StoreError::Corrupt { .. }) => {
                Failure::Invalid(corrupt.to_string())
            }
            other => Failure::Usage(other.to_string()),
        })?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        tilt_hub::serve(hub, addr, shutdown).await.map_err(|e| Failure::Usage(format!("{addr}: {e}")))?;
        Ok(EXIT_OK)
    })
}
