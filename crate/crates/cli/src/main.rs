use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use restore_cli::pipeline::{cmd_embed, cmd_extract, cmd_reconstruct, cmd_report, cmd_semantic};
use restore_cli::{exit, run_all, CliError, Overrides, PipelineConfig, StageOutcome};
use restore_core::ingest::EdgeFormat;

#[derive(Parser)]
#[command(name = "restore", version, about = "Embed k-hop ego subgraphs, reconstruct them and evaluate semantics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one subgraph file per (center, hop) plus size statistics
    Extract(Common),
    /// Train every algorithm on every extracted subgraph
    Embed(Common),
    /// Score reconstructions against the original subgraphs
    Reconstruct(Common),
    /// Similarity and analogy distances per dataset, hop and algorithm
    Semantic(Common),
    /// Consolidate earlier stages into JSON and CSV
    Report(Common),
    /// All stages in order
    RunAll(Common),
}

#[derive(Args)]
struct Common {
    /// Manifest file
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (RESTORE_WORKERS takes precedence)
    #[arg(long)]
    workers: Option<usize>,
    /// Render original vs reconstructed graphs as Graphviz files
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    threshold: Option<f64>,
    /// Graph file format: tsv3 or tsv_kgtk
    #[arg(long, value_parser = parse_format)]
    format: Option<EdgeFormat>,
    /// Keep embeddings that already exist under the output directory
    #[arg(long)]
    resume: bool,
    /// Also write embeddings as tab-separated text
    #[arg(long)]
    text: bool,
}

fn parse_format(s: &str) -> Result<EdgeFormat, String> {
    EdgeFormat::parse(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<StageOutcome, CliError> {
    let (stage, common): (fn(&PipelineConfig) -> Result<StageOutcome, CliError>, Common) = match cli.command {
        Command::Extract(c) => (cmd_extract, c),
        Command::Embed(c) => (cmd_embed, c),
        Command::Reconstruct(c) => (cmd_reconstruct, c),
        Command::Semantic(c) => (cmd_semantic, c),
        Command::Report(c) => (cmd_report, c),
        Command::RunAll(c) => (run_all, c),
    };
    let overrides = Overrides {
        output: common.output,
        seed: common.seed,
        workers: common.workers,
        threshold: common.threshold,
        format: common.format,
        dot: common.dot,
        resume: common.resume,
        text_embeddings: common.text,
    };
    let cfg = PipelineConfig::load(&common.config, &overrides).map_err(|e| match e {
        // an unreadable or invalid manifest is a usage problem
        CliError::Core(c) => CliError::Config(c.to_string()),
        other => other,
    })?;
    stage(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::SUCCESS as u8 });
        }
    };
    let code = match run(cli) {
        Ok(o) if o.failed > 0 => {
            error!("{} cell(s) failed; see the errors list in the stage index", o.failed);
            exit::PARTIAL_FAILURE
        }
        Ok(_) => exit::SUCCESS,
        Err(e) => {
            error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
