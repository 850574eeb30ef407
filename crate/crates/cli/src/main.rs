//! `cubekit`: artifact extraction, prompt plans, image mapping, diversity
//! scoring, rater statistics and published-table checks.
//!
//! Exit codes: 0 success, 1 internal or client failure, 2 usage or input
//! error, 3 table check failed.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cubekit_core::clients::ClientError;
use cubekit_core::vendi::VendiError;
use cubekit_core::Concept;

#[derive(Parser)]
#[command(
    name = "cubekit",
    version,
    about = "Cultural diversity toolkit for text-to-image evaluation"
)]
struct Cli {
    /// Maximum concurrent client calls.
    #[arg(long, global = true, default_value_t = 4, env = "CUBEKIT_PARALLEL")]
    parallel: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract cultural artifacts from a KB-JSONL dump.
    Extract(ExtractArgs),
    /// Render awareness prompts for extracted artifacts.
    Prompts(PromptsArgs),
    /// Write the prompt and seed plan for a diversity run.
    Plan(PlanArgs),
    /// Map planned images to (continent, country, artifact) through model clients.
    Map(MapArgs),
    /// Score mapped images and aggregate over seed batches.
    Score(ScoreArgs),
    /// Rater agreement and correlation statistics.
    Stats(StatsArgs),
    /// Check published diversity tables for internal consistency.
    Tablecheck(TablecheckArgs),
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long, env = "CUBEKIT_KB")]
    pub kb: PathBuf,
    /// JSON list of root sets; the curated defaults are used when omitted.
    #[arg(long, env = "CUBEKIT_ROOTS")]
    pub roots: Option<PathBuf>,
    #[arg(long, default_value_t = cubekit_core::extraction::DEFAULT_HOPS, env = "CUBEKIT_HOPS")]
    pub hops: u32,
    /// Stop at the first malformed line (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Skip malformed lines and report how many were skipped.
    #[arg(long)]
    pub lenient: bool,
    /// Client used to judge and complete the extracted set.
    #[arg(long, env = "CUBEKIT_REFINE")]
    pub refine: Option<String>,
    /// Client used to rank artifacts by search popularity.
    #[arg(long, env = "CUBEKIT_POPULARITY")]
    pub popularity: Option<String>,
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PromptsArgs {
    /// Artifacts JSONL written by `extract`.
    #[arg(long)]
    pub artifacts: PathBuf,
    /// Keep only artifacts of this concept.
    #[arg(long)]
    pub concept: Option<Concept>,
    /// Output JSONL file.
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args, Clone)]
pub struct PlanOpts {
    #[arg(long)]
    pub concept: Concept,
    /// ISO code of the culture for a within-culture run.
    #[arg(long)]
    pub culture: Option<String>,
    /// Number of default prompt templates to use.
    #[arg(long)]
    pub templates: Option<usize>,
    #[arg(long)]
    pub seed_batches: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub start_seed: Option<u64>,
}

#[derive(Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub plan: PlanOpts,
    /// Output JSON file.
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub plan: PlanOpts,
    /// Vision-language client (`canned:DIR` or `stdio:CMD ARGS`).
    #[arg(long, env = "CUBEKIT_MAPPER")]
    pub mapper: String,
    /// Retrieval client; defaults to the mapper.
    #[arg(long, env = "CUBEKIT_RETRIEVER")]
    pub retriever: Option<String>,
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub plan: PlanOpts,
    /// Mapped items (CSV, or JSONL by extension).
    #[arg(long, env = "CUBEKIT_MAPPED")]
    pub mapped: PathBuf,
    /// Per-image quality scores, CSV `image_id,score`.
    #[arg(
        long,
        env = "CUBEKIT_QUALITY",
        required_unless_present = "uniform_quality"
    )]
    pub quality: Option<PathBuf>,
    /// Score every image with quality 1.
    #[arg(long, conflicts_with = "quality")]
    pub uniform_quality: bool,
    /// Kernel preset; repeatable. `all` selects all five.
    #[arg(
        long = "preset",
        default_value = "all",
        env = "CUBEKIT_PRESET",
        value_delimiter = ','
    )]
    pub presets: Vec<String>,
    /// Vendi order.
    #[arg(long, default_value_t = 1.0, env = "CUBEKIT_Q")]
    pub q: f64,
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Ratings CSV `item_id,question,rater_index,value`.
    #[arg(long, env = "CUBEKIT_RATINGS")]
    pub ratings: Option<PathBuf>,
    /// Series CSV `series,key,value`; every pair is correlated.
    #[arg(long, env = "CUBEKIT_SERIES")]
    pub series: Option<PathBuf>,
    #[arg(long, env = "CUBEKIT_OUT")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TablecheckArgs {
    /// Table CSV `model,concept,kernel,q,vs_bar,cd`; the bundled table when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value_t = cubekit_core::tablecheck::TABLE_TOLERANCE)]
    pub tolerance: f64,
    /// Optional JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    CheckFailed,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ClientError>() {
            return if matches!(e, ClientError::MissingCanned { .. }) {
                2
            } else {
                1
            };
        }
        if let Some(VendiError::NotPsd { .. }) = cause.downcast_ref::<VendiError>() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parallel = cli.parallel.max(1);
    let result = match cli.command {
        Command::Extract(a) => commands::extract(&a, parallel),
        Command::Prompts(a) => commands::prompts(&a),
        Command::Plan(a) => commands::plan(&a),
        Command::Map(a) => commands::map(&a, parallel),
        Command::Score(a) => commands::score(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Tablecheck(a) => commands::tablecheck(&a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
