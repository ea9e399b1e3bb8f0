use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chartkg::build::build_kg;
use chartkg::gen::corpus::generate_corpus;
use chartkg::parse::{chart_id_of, ChartParser, ParseResult};
use chartkg::pipeline::{self, append_errors, ChartError};
use chartkg::query::index::kg_files;
use chartkg::query::{answer, index_corpus, retrieve, CorpusIndex, Query};
use chartkg::{ChartKg, Config, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Chart images to knowledge graphs, with retrieval and question answering.
#[derive(Parser)]
#[command(name = "chartkg", version)]
struct Cli {
    /// JSON run configuration; defaults apply to omitted keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with annotations and truth graphs.
    Gen(GenArgs),
    /// Parse chart images into parse results.
    Parse(IoArgs),
    /// Build graphs from parse results.
    Build(IoArgs),
    /// Index graph files for retrieval.
    Index(IoArgs),
    /// Retrieve charts from an index.
    Retrieve(RetrieveArgs),
    /// Answer a question over one graph.
    Qa(QaArgs),
    /// Score a finished run directory against its corpus.
    Eval(EvalArgs),
    /// Run generation, parsing, building, indexing and evaluation.
    Pipeline(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output directory. For `pipeline` the corpus goes to `<out>/corpus`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Charts per chart type.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args)]
struct IoArgs {
    /// Input files or directories.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory (file for `index`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query JSON, or `@path` to read it from a file.
    #[arg(long)]
    query: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct QaArgs {
    #[arg(long)]
    kg: PathBuf,
    #[arg(long)]
    question: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Run directory holding `parse/` and `kg/`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corpus directory; defaults to the configured one.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

/// A failed command: the error plus the directory whose `errors.jsonl`
/// receives domain errors.
struct Failure {
    error: Error,
    errors_dir: PathBuf,
    chart_id: String,
    stage: &'static str,
}

type CmdResult = Result<(), Box<Failure>>;

trait Context<T> {
    fn at(self, errors_dir: &Path, chart_id: &str, stage: &'static str) -> Result<T, Box<Failure>>;
}

impl<T> Context<T> for chartkg::Result<T> {
    fn at(self, errors_dir: &Path, chart_id: &str, stage: &'static str) -> Result<T, Box<Failure>> {
        self.map_err(|error| {
            Box::new(Failure {
                error,
                errors_dir: errors_dir.to_path_buf(),
                chart_id: chart_id.to_string(),
                stage,
            })
        })
    }
}

/// Writes to stdout. A closed pipe (`chartkg ... | head`) ends the process
/// quietly instead of panicking.
fn emit(args: std::fmt::Arguments<'_>) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_fmt(args).and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(2);
    }
}

macro_rules! out {
    ($($t:tt)*) => {
        emit(format_args!($($t)*))
    };
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> chartkg::Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

/// Files under the inputs whose names end in `suffix`; directories are
/// listed one level deep, sorted.
fn collect_inputs(inputs: &[PathBuf], suffix: &str) -> chartkg::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| io_err(input, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.to_string_lossy().ends_with(suffix))
                .collect();
            found.sort();
            out.extend(found);
        } else if input.is_file() {
            out.push(input.clone());
        } else {
            return Err(Error::Config(format!("no such input: {}", input.display())));
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no `*{suffix}` inputs found")));
    }
    Ok(out)
}

fn write(path: &Path, text: &str) -> chartkg::Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn mkdir(path: &Path) -> chartkg::Result<()> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> chartkg::Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Per-input outcomes of a batch command: successes are written, failures
/// recorded, and the first domain failure becomes the exit status.
fn finish_batch(errors_dir: &Path, failures: Vec<(String, &'static str, Error)>) -> CmdResult {
    let records: Vec<ChartError> = failures
        .iter()
        .map(|(id, stage, e)| ChartError::new(id, stage, e))
        .collect();
    let path = errors_dir.join("errors.jsonl");
    if !records.is_empty() {
        mkdir(errors_dir)
            .and_then(|_| append_errors(&path, &records))
            .at(errors_dir, "", "cli")?;
    }
    match failures.into_iter().next() {
        Some((id, stage, error)) => Err(Box::new(Failure {
            error,
            // Already recorded above.
            errors_dir: PathBuf::new(),
            chart_id: id,
            stage,
        })),
        None => Ok(()),
    }
}

fn cmd_gen(cfg: &mut Config, args: &GenArgs) -> CmdResult {
    apply_gen_args(cfg, args);
    if let Some(out) = &args.out {
        cfg.paths.corpus = out.clone();
    }
    let dir = cfg.paths.corpus.clone();
    cfg.validate().at(&dir, "", "gen")?;
    let summary = generate_corpus(&cfg.gen, &cfg.insight, &dir).at(&dir, "", "gen")?;
    out!("{} charts written to {}\n", summary.charts, dir.display());
    Ok(())
}

fn apply_gen_args(cfg: &mut Config, args: &GenArgs) {
    if let Some(s) = args.seed {
        cfg.gen.seed = s;
    }
    if let Some(n) = args.count {
        cfg.gen.per_type_count = n;
    }
}

fn cmd_parse(cfg: &Config, args: &IoArgs) -> CmdResult {
    let errors_dir = args.out.clone().unwrap_or_else(|| cfg.paths.out.clone());
    let inputs = collect_inputs(&args.inputs, ".png").at(&errors_dir, "", "parse")?;
    let parser = ChartParser::from_config(&cfg.parser);
    let mut failures = Vec::new();
    let mut results = Vec::new();
    for path in &inputs {
        match parser.parse_file(path) {
            Ok(pr) => results.push(pr),
            Err(e) if e.is_domain() => failures.push((chart_id_of(path), "parse", e)),
            Err(e) => return Err(e).at(&errors_dir, &chart_id_of(path), "parse"),
        }
    }
    for pr in &results {
        let text = pr.to_json().at(&errors_dir, &pr.chart_id, "parse")?;
        match &args.out {
            Some(dir) => {
                mkdir(dir).at(dir, "", "parse")?;
                write(&dir.join(format!("{}.parse.json", pr.chart_id)), &text).at(
                    dir,
                    &pr.chart_id,
                    "parse",
                )?;
            }
            None => out!("{text}"),
        }
    }
    finish_batch(&errors_dir, failures)
}

fn cmd_build(cfg: &Config, args: &IoArgs) -> CmdResult {
    let errors_dir = args.out.clone().unwrap_or_else(|| cfg.paths.out.clone());
    let inputs = collect_inputs(&args.inputs, ".parse.json").at(&errors_dir, "", "build")?;
    let mut parsed = Vec::new();
    for path in &inputs {
        let id = chart_id_of(path);
        let pr =
            read(path)
                .and_then(|t| ParseResult::from_json(&t))
                .at(&errors_dir, &id, "build")?;
        parsed.push(pr);
    }
    let mut failures = Vec::new();
    let mut kgs = Vec::new();
    for pr in &parsed {
        match build_kg(pr, &cfg.insight) {
            Ok(kg) => kgs.push(kg),
            Err(e) if e.is_domain() => failures.push((pr.chart_id.clone(), "build", e)),
            Err(e) => return Err(e).at(&errors_dir, &pr.chart_id, "build"),
        }
    }
    for kg in &kgs {
        match &args.out {
            Some(dir) => {
                mkdir(dir).at(dir, "", "build")?;
                write(&dir.join(format!("{}.kg.json", kg.chart_id)), &kg.to_json()).at(
                    dir,
                    &kg.chart_id,
                    "build",
                )?;
                if args.format == Format::Tsv {
                    write(
                        &dir.join(format!("{}.triples.tsv", kg.chart_id)),
                        &kg.export_triples(),
                    )
                    .at(dir, &kg.chart_id, "build")?;
                }
            }
            None => match args.format {
                Format::Json => out!("{}", kg.to_json()),
                Format::Tsv => out!("{}", kg.export_triples()),
            },
        }
    }
    finish_batch(&errors_dir, failures)
}

fn cmd_index(cfg: &Config, args: &IoArgs) -> CmdResult {
    let errors_dir = cfg.paths.out.clone();
    let mut files = Vec::new();
    for input in &args.inputs {
        if input.is_dir() {
            files.extend(kg_files(input).at(&errors_dir, "", "index")?);
        } else {
            files.push(input.clone());
        }
    }
    let index = index_corpus(&files).at(&errors_dir, "", "index")?;
    let text = index.to_json().at(&errors_dir, "", "index")?;
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                mkdir(parent).at(&errors_dir, "", "index")?;
            }
            write(path, &text).at(&errors_dir, "", "index")?;
            out!(
                "indexed {} charts ({} skipped) into {}\n",
                index.len(),
                index.errors().len(),
                path.display()
            );
        }
        None => out!("{text}"),
    }
    Ok(())
}

fn cmd_retrieve(cfg: &Config, args: &RetrieveArgs) -> CmdResult {
    let errors_dir = cfg.paths.out.clone();
    let text = match args.query.strip_prefix('@') {
        Some(path) => read(Path::new(path)).at(&errors_dir, "", "retrieve")?,
        None => args.query.clone(),
    };
    let query = Query::from_json(&text)
        .map_err(|e| Error::Config(format!("invalid query: {e}")))
        .at(&errors_dir, "", "retrieve")?;
    let index = CorpusIndex::load(&args.index).at(&errors_dir, "", "retrieve")?;
    let hits = retrieve(&index, &query).at(&errors_dir, "", "retrieve")?;
    match args.format {
        Format::Json => {
            let v =
                serde_json::to_value(&hits)
                    .map_err(Error::from)
                    .at(&errors_dir, "", "retrieve")?;
            out!(
                "{}\n",
                serde_json::to_string_pretty(&v).map_err(Error::from).at(
                    &errors_dir,
                    "",
                    "retrieve"
                )?
            );
        }
        Format::Tsv => {
            for (rank, h) in hits.iter().enumerate() {
                out!("{}\t{}\t{}\n", rank + 1, h.chart_id, h.score);
            }
        }
    }
    Ok(())
}

fn cmd_qa(cfg: &Config, args: &QaArgs) -> CmdResult {
    let errors_dir = cfg.paths.out.clone();
    let kg = read(&args.kg)
        .and_then(|t| ChartKg::from_json(&t))
        .at(&errors_dir, "", "qa")?;
    let ans = answer(&kg, &args.question).at(&errors_dir, &kg.chart_id, "qa")?;
    out!("{}", ans.to_json().at(&errors_dir, &kg.chart_id, "qa")?);
    Ok(())
}

fn cmd_eval(cfg: &mut Config, args: &EvalArgs) -> CmdResult {
    if let Some(out) = &args.out {
        cfg.paths.out = out.clone();
    }
    if let Some(c) = &args.corpus {
        cfg.paths.corpus = c.clone();
    }
    let out = cfg.paths.out.clone();
    let inputs = pipeline::load_eval_inputs(&cfg.paths.corpus, &out).at(&out, "", "eval")?;
    let (report, timing) = pipeline::evaluate(&inputs, cfg).at(&out, "", "eval")?;
    pipeline::write_reports(&out, &report, &timing).at(&out, "", "eval")?;
    out!("{}", report.to_text());
    Ok(())
}

fn cmd_pipeline(cfg: &mut Config, args: &GenArgs) -> CmdResult {
    apply_gen_args(cfg, args);
    if let Some(out) = &args.out {
        cfg.paths.corpus = out.join("corpus");
        cfg.paths.out = out.clone();
    }
    let out = cfg.paths.out.clone();
    cfg.validate().at(&out, "", "pipeline")?;
    let report = pipeline::run(cfg).at(&out, "", "pipeline")?;
    out!("{}", report.eval.to_text());
    Ok(())
}

fn dispatch(cli: &Cli) -> CmdResult {
    let mut cfg = load_config(cli.config.as_deref()).at(Path::new("."), "", "config")?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(&mut cfg, a),
        Command::Parse(a) => cmd_parse(&cfg, a),
        Command::Build(a) => cmd_build(&cfg, a),
        Command::Index(a) => cmd_index(&cfg, a),
        Command::Retrieve(a) => cmd_retrieve(&cfg, a),
        Command::Qa(a) => cmd_qa(&cfg, a),
        Command::Eval(a) => cmd_eval(&mut cfg, a),
        Command::Pipeline(a) => cmd_pipeline(&mut cfg, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHARTKG_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            if f.error.is_domain() {
                if !f.errors_dir.as_os_str().is_empty() {
                    let record = ChartError::new(&f.chart_id, f.stage, &f.error);
                    let path = f.errors_dir.join("errors.jsonl");
                    if let Err(e) =
                        mkdir(&f.errors_dir).and_then(|_| append_errors(&path, &[record]))
                    {
                        eprintln!("error: could not record failure: {e}");
                    }
                }
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
