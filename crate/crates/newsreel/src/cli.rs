//! Command-line entry points.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use newsreel_core::highlight::SimilarityBackend;
use newsreel_core::{Article, Condition, Framing};

use crate::api::{router, serve, AppState};
use crate::blobs::{copy_images, MemoryBlobs};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::export::{export_bundle, ExportManifest};
use crate::providers::{Backends, Cassette, Mode, Providers, DEFAULT_PARALLELISM};
use crate::ratings;
use crate::session::{HighlightOptions, Session};
use crate::workspace::Workspace;

#[derive(Debug, Parser)]
#[command(name = "newsreel", version, about = "Turn a news article into a reel script and storyboard")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Run the whole pipeline on one article and export the bundle.
    Run(RunArgs),
    /// Export a stored project as a bundle.
    Export(ExportArgs),
    /// Evaluation statistics over rating files.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Live,
    Record,
    Replay,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Live => Mode::Live,
            ModeArg::Record => Mode::Record,
            ModeArg::Replay => Mode::Replay,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimilarityArg {
    /// Embeddings when available, lexical otherwise.
    Auto,
    Embedding,
    Lexical,
}

impl SimilarityArg {
    fn backend(self) -> Option<SimilarityBackend> {
        match self {
            SimilarityArg::Auto => None,
            SimilarityArg::Embedding => Some(SimilarityBackend::EmbeddingCosine),
            SimilarityArg::Lexical => Some(SimilarityBackend::LexicalFallback),
        }
    }
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    #[arg(long, value_enum, default_value = "live")]
    pub mode: ModeArg,
    /// Cassette file, required for record and replay.
    #[arg(long)]
    pub cassette: Option<PathBuf>,
    /// Upper bound on concurrent provider calls.
    #[arg(long, default_value_t = DEFAULT_PARALLELISM)]
    pub parallelism: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "projects")]
    pub storage_dir: PathBuf,
    #[command(flatten)]
    pub providers: ProviderArgs,
    /// Directory of static UI assets to serve at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Article text file: the first non-empty line is the headline.
    #[arg(long)]
    pub article: PathBuf,
    #[arg(long)]
    pub framing: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "with_premise")]
    pub condition: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub similarity: SimilarityArg,
    #[command(flatten)]
    pub providers: ProviderArgs,
    /// Write every prompt sent to providers to this JSON file.
    #[arg(long)]
    pub dump_prompts: Option<PathBuf>,
    /// Also store the project in this workspace.
    #[arg(long)]
    pub storage_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub project: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "projects")]
    pub storage_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Paired Wilcoxon signed-rank test. Input is either `a,b` pairs or
    /// ratings together with `--pairs`.
    Wilcoxon {
        #[arg(long)]
        input: PathBuf,
        /// CSV with columns without_script_id, with_script_id.
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Cohen's kappa. Input is either `rater_a,rater_b` columns or ratings
    /// from exactly two raters.
    Kappa {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Reads an article file: first non-empty line is the headline, the rest
/// is the body.
pub fn read_article(path: &Path, ingested_at: newsreel_core::Timestamp) -> Result<Article> {
    let text = fs::read_to_string(path)?;
    let text = text.trim_start_matches('\u{feff}');
    let mut lines = text.lines();
    let headline = lines.by_ref().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default().to_string();
    let body = lines.collect::<Vec<_>>().join("\n").trim().to_string();
    Ok(Article::new(headline, body, ingested_at)?)
}

/// Providers for `args`. Replayed and recorded runs use the logical clock
/// so their timestamps repeat.
pub fn build_providers(args: &ProviderArgs) -> Result<Providers> {
    let mode: Mode = args.mode.into();
    let cassette = match (&args.cassette, mode) {
        (None, Mode::Live) => None,
        (None, _) => return Err(Error::invalid("cassette", "required in record and replay modes")),
        (Some(path), Mode::Replay) => Some(Cassette::load(path)?),
        (Some(path), _) => Some(Cassette::load_or_create(path)?),
    };
    let backends = if mode == Mode::Replay { Backends::default() } else { Backends::from_env()? };
    let clock = if mode == Mode::Live { Clock::System } else { Clock::logical() };
    Ok(Providers::new(mode, backends, cassette)?.with_clock(Arc::new(clock)).with_parallelism(args.parallelism))
}

/// Runs every stage on one article. Returns the export manifest.
pub fn run_pipeline(args: &RunArgs, providers: &Providers) -> Result<ExportManifest> {
    let framing: Framing = args.framing.parse()?;
    let condition: Condition = args.condition.parse()?;
    let blobs = MemoryBlobs::default();
    let session = Session::new(providers, &blobs);
    let article = read_article(&args.article, providers.clock().now())?;
    let mut project = session.create_project(article)?;
    session.extract(&mut project)?;
    session.generate_premise(&mut project, framing)?;
    session.generate_script(&mut project, condition, None, Some(framing))?;
    session
        .assign_highlights(&mut project, HighlightOptions { threshold: None, backend: args.similarity.backend() })?;
    session.build_character_board(&mut project)?;
    session.build_storyboard(&mut project)?;
    if let Some(dir) = &args.storage_dir {
        let ws = Workspace::open(dir)?;
        ws.save(&project)?;
        copy_images(&project, &blobs, &ws.blobs(&project.id)?)?;
    }
    export_bundle(&project, &blobs, &args.out)
}

fn dump_prompts(path: &Path, providers: &Providers) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&providers.prompt_log()).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_command(args: RunArgs) -> Result<()> {
    let providers = build_providers(&args.providers)?;
    let result = run_pipeline(&args, &providers);
    if let Some(path) = &args.dump_prompts {
        dump_prompts(path, &providers)?;
    }
    let manifest = result?;
    println!("project {}", manifest.project_id);
    println!("{} files written to {}", manifest.files.len(), args.out.display());
    for o in &manifest.omitted {
        println!("omitted {}: {}", o.section, o.reason);
    }
    println!("{} provider calls", providers.calls());
    Ok(())
}

fn serve_command(args: ServeArgs) -> Result<()> {
    // Blocking HTTP clients must exist before the async runtime starts.
    let providers = Arc::new(build_providers(&args.providers)?);
    let workspace = Workspace::open(&args.storage_dir)?;
    let app = router(AppState::new(workspace, providers), args.static_dir.clone());
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(serve(addr, app))?;
    Ok(())
}

fn export_command(args: ExportArgs) -> Result<()> {
    let ws = Workspace::open(&args.storage_dir)?;
    let project = ws.load(&args.project)?;
    let blobs = ws.blobs(&project.id)?;
    let manifest = export_bundle(&project, &blobs, &args.out)?;
    println!("{} files written to {}", manifest.files.len(), args.out.display());
    Ok(())
}

fn eval_command(cmd: EvalCommand) -> Result<()> {
    let report = match cmd {
        EvalCommand::Wilcoxon { input, pairs } => {
            let pairs = pairs.map(fs::read_to_string).transpose()?;
            ratings::wilcoxon_command(&fs::read_to_string(input)?, pairs.as_deref())?
        }
        EvalCommand::Kappa { input } => ratings::kappa_command(&fs::read_to_string(input)?)?,
    };
    print!("{report}");
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve(a) => serve_command(a),
        Command::Run(a) => run_command(a),
        Command::Export(a) => export_command(a),
        Command::Eval(c) => eval_command(c),
    }
}

/// Parses arguments, runs, and maps errors to exit code 1.
pub fn main() -> std::process::ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            std::process::ExitCode::FAILURE
        }
    }
}
