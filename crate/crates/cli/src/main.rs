use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(
    name = "wikitig",
    version,
    about = "Build infobox datasets and score generated tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract infoboxes from HTML pages and write task files.
    Extract(ExtractArgs),
    /// Print the split label of a title.
    Split(SplitArgs),
    /// Re-emit task files from an existing dataset directory.
    Emit(EmitArgs),
    /// Score generated linearized tables against references.
    #[command(name = "eval-table")]
    EvalTable(EvalArgs),
    /// Print corpus statistics for a dataset directory.
    Stats(StatsArgs),
    /// Paired bootstrap test between two evaluation reports.
    Significance(SignificanceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TaskArg {
    Table,
    Image,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Strict,
    Lenient,
}

fn parse_cap(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(n @ (256 | 384 | 480)) => Ok(n),
        _ => Err(format!("expected 256, 384 or 480, got {s:?}")),
    }
}

#[derive(Args, Debug, Serialize)]
struct ExtractArgs {
    /// Directory of *.html files, or a single dump file with page delimiters.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    task: TaskArg,
    #[arg(long, value_parser = parse_cap, default_value = "480")]
    cap: u32,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    #[arg(long)]
    title: String,
}

#[derive(Args, Debug, Serialize)]
struct EmitArgs {
    /// Dataset directory containing train/valid/test.jsonl.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    task: TaskArg,
    #[arg(long, value_parser = parse_cap, default_value = "480")]
    cap: u32,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    /// JSON Lines file of generated tables.
    #[arg(long = "gen")]
    generated: PathBuf,
    /// JSON Lines file of reference tables.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    mode: ModeArg,
    /// Stem tokens before computing ROUGE.
    #[arg(long)]
    stem: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct StatsArgs {
    /// Dataset directory containing train/valid/test.jsonl.
    #[arg(long)]
    input: PathBuf,
    /// JSON output path; defaults to stats.json inside the input directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SignificanceArgs {
    /// Report of system A (output of eval-table).
    #[arg(long)]
    a: PathBuf,
    /// Report of system B.
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    resamples: u64,
    #[arg(long, default_value_t = 12_345)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("WIKITIG_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        anyhow::anyhow!("WIKITIG_THREADS must be a positive integer, got {value:?}")
    })?;
    if threads == 0 {
        anyhow::bail!("WIKITIG_THREADS must be a positive integer, got 0");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Extract(args) => commands::extract(&args),
        Command::Split(args) => commands::split(&args),
        Command::Emit(args) => commands::emit(&args),
        Command::EvalTable(args) => commands::eval_table(&args),
        Command::Stats(args) => commands::stats(&args),
        Command::Significance(args) => commands::significance(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
