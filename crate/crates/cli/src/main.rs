mod normalize;
mod search;

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use formulary_core::canon::Rule;
use formulary_core::index::{IndexConfig, IndexSnapshot};
use formulary_core::ingest::{self, BuildError};
use formulary_core::query::MathMode;
use formulary_server::{AppState, ServerConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "formulary",
    version,
    about = "Build, query and serve a math-aware search index"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index a JSON-lines corpus.
    Build(BuildArgs),
    /// Run a query against an index.
    Search(SearchArgs),
    /// Canonicalize MathML or TeX files, optionally writing an HTML report.
    Normalize(NormalizeArgs),
    /// Serve the HTTP API (and a built UI, if given).
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// key=value file with weight and analysis settings.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_name = "PATH")]
    index: PathBuf,
    #[arg(long, short)]
    query: String,
    #[arg(long, default_value = "both", value_parser = parse_math_mode)]
    math_mode: MathMode,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    page: u32,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=1000))]
    size: u32,
    /// Facet filter such as `language=en`; repeatable.
    #[arg(long = "facet", value_name = "FIELD=VALUE")]
    facets: Vec<String>,
    /// Overrides the index's math weight.
    #[arg(long)]
    math_weight: Option<f64>,
    /// Show the score breakdown of every hit on the page.
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// MathML (.xml, .mml) or TeX (.tex) files, or directories of them.
    #[arg(long = "in", value_name = "PATH", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Write a before/after HTML report here.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Comma-separated subset of rules to apply, e.g. `R1,R3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_rule)]
    rules: Option<Vec<Rule>>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, value_name = "PATH")]
    index: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Directory with a built UI (must contain index.html).
    #[arg(long, value_name = "DIR")]
    ui: Option<PathBuf>,
    /// Public URL written into /opensearch.xml.
    #[arg(long)]
    base_url: Option<String>,
    /// Allowed CORS origin; repeatable. Any origin when omitted.
    #[arg(long = "cors-origin", value_name = "ORIGIN")]
    cors_origins: Vec<String>,
    /// Reload the index file when it changes, checking every N seconds (0 = never).
    #[arg(long, default_value_t = 0, value_name = "SECS")]
    reload_interval: u64,
}

fn parse_math_mode(s: &str) -> Result<MathMode, String> {
    s.parse()
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse()
}

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

pub fn load_index(path: &Path) -> Result<IndexSnapshot, Failure> {
    IndexSnapshot::load(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn build(args: BuildArgs) -> Result<(), Failure> {
    let config = match &args.config {
        Some(path) => ingest::load_config(path).map_err(|e| Failure::data(e.to_string()))?,
        None => IndexConfig::default(),
    };
    let summary = ingest::build(&args.corpus, &args.out, config).map_err(|e| match e {
        BuildError::NoDocuments { .. } => Failure::data(format!("{}: no documents indexed", args.corpus.display())),
        other => Failure::data(other.to_string()),
    })?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        );
    } else {
        println!(
            "indexed {} documents: {} terms, {} math terms, {} warnings -> {}",
            summary.docs,
            summary.terms,
            summary.math_terms,
            summary.warnings.len(),
            args.out.display()
        );
    }
    Ok(())
}

fn modified(path: &Path) -> Option<SystemTime> {
    std::fs::metadata(path).and_then(|m| m.modified()).ok()
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let index = load_index(&args.index)?;
    let addr = SocketAddr::new(args.host, args.port);
    let config = ServerConfig {
        base_url: args.base_url.unwrap_or_else(|| format!("http://{addr}")),
        ui_dir: args.ui,
        cors_origins: (!args.cors_origins.is_empty()).then_some(args.cors_origins),
    };
    let state = AppState::new(index, config);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::data(e.to_string()))?;
    runtime.block_on(async {
        if args.reload_interval > 0 {
            let state = state.clone();
            let path = args.index.clone();
            let mut interval = tokio::time::interval(Duration::from_secs(args.reload_interval));
            let mut seen = modified(&path);
            tokio::spawn(async move {
                loop {
                    interval.tick().await;
                    let now = modified(&path);
                    if now == seen {
                        continue;
                    }
                    seen = now;
                    match IndexSnapshot::load(&path) {
                        Ok(index) => {
                            log::info!("reloaded {} ({} documents)", path.display(), index.doc_count());
                            state.swap(index);
                        }
                        Err(e) => log::error!("reload of {} failed, keeping old index: {e}", path.display()),
                    }
                }
            });
        }
        formulary_server::serve(addr, state)
            .await
            .map_err(|e| Failure::data(format!("{addr}: {e}")))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FORMULARY_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Build(args) => build(args),
        Command::Search(args) => search::run(args),
        Command::Normalize(args) => normalize::run(args),
        Command::Serve(args) => serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("formulary: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
