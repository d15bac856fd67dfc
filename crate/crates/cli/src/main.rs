mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Parser)]
#[command(name = "authsignal", version, about = "Screen publication metadata for authorship anomalies")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "AUTHSIGNAL_CONFIG")]
    config: Option<PathBuf>,
    /// Where artifacts are read from and written to.
    #[arg(long, global = true, env = "AUTHSIGNAL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Seed for clustering and preset generation.
    #[arg(long, global = true, env = "AUTHSIGNAL_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize raw records into the corpus artifact.
    Ingest(IngestArgs),
    /// Indicator table as CSV and JSONL.
    Metrics,
    /// Author-level flags as JSONL.
    Flags,
    /// Co-authorship network around the study group.
    Network(NetworkArgs),
    /// Run the screening funnel and write per-institution dossiers.
    Screen(ScreenArgs),
    /// Generate a synthetic corpus with planted anomalies.
    Synth(SynthArgs),
    /// Markdown and CSV tables.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Raw record files (JSONL or CSV by extension).
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Force the input format instead of guessing from the extension.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub min_articles: Option<u64>,
}

#[derive(Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub top_k: Option<u32>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Generator spec (TOML or JSON). Without it a preset universe is built.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub institutions: usize,
    /// Institutions given a funnel-passing surge.
    #[arg(long, default_value_t = 3)]
    pub planted: usize,
    #[arg(long, default_value_t = 100)]
    pub base_output: u32,
    /// Skip the hyperprolific, external and cross-group author plants.
    #[arg(long)]
    pub no_author_plants: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Render the bundled published-table fixtures instead of a corpus.
    #[arg(long)]
    pub fixtures: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, err) = match &failure {
                Failure::Config(e) => (1u8, e),
                Failure::Data(e) => (2u8, e),
            };
            let line = serde_json::json!({
                "error": format!("{err:#}"),
                "kind": if code == 1 { "config" } else { "data" },
                "exit_code": code,
            });
            eprintln!("{line}");
            ExitCode::from(code)
        }
    }
}
