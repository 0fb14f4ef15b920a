//! `mdts`: generate fields, estimate entropy rates, test typicality,
//! demonstrate packing, compress, and run seeded experiment sweeps.
//!
//! Exit status: 0 on success, 2 on usage errors, 1 on data errors.

mod commands;
mod config;
mod experiment;
mod model;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<mdts_core::Error> for CliError {
    fn from(e: mdts_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "mdts",
    version,
    about = "Block statistics, typical sets and block coding on d-dimensional lattices"
)]
pub struct Cli {
    /// Flat key=value file; keys are long flag names, flags override it.
    #[arg(long, global = true, visible_alias = "spec", value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a field from a source model and write it as MDA1.
    Gen(GenArgs),
    /// Plug-in entropy-rate estimate from non-overlapping k-blocks.
    Estimate(EstimateArgs),
    /// MDA1 (or binary PGM) to MDTC.
    Compress(CompressArgs),
    /// MDTC to MDA1.
    Decompress(DecompressArgs),
    /// Membership in a typical set.
    Typical(TypicalArgs),
    /// Best shifted m-partition for a block library.
    Packing(PackingArgs),
    /// Fraction of non-overlapping k-blocks inside a library.
    Coverage(CoverageArgs),
    /// Seeded parameter sweep streamed as CSV.
    Experiment(experiment::ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub model: String,
    /// Side lengths, e.g. 256x256.
    #[arg(long)]
    pub dims: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BlockChoice {
    /// Block side; omit to use the k schedule.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub block: BlockChoice,
    /// Follow the k schedule even when k-blocks are undersampled.
    #[arg(long)]
    pub no_guard: bool,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Block side; automatic when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// block or lz78-hilbert.
    #[arg(long, default_value = "block")]
    pub codec: String,
}

#[derive(Args, Debug)]
pub struct DecompressArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct LibraryArgs {
    /// Library file (sorted hex block keys under a header line).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Build the entropy-typical m-blocks of this model instead.
    #[arg(long)]
    pub typical_of: Option<String>,
    /// Draw this many distinct m-blocks uniformly instead.
    #[arg(long)]
    pub random_size: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub library_seed: u64,
    /// Also write the library used.
    #[arg(long)]
    pub save_library: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TypicalArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// universal, sampling or entropy.
    #[arg(long, default_value = "universal")]
    pub set: String,
    #[arg(long, default_value_t = 0.6)]
    pub h0: f64,
    #[command(flatten)]
    pub block: BlockChoice,
    /// Source model for the entropy-typical test.
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub library: LibraryArgs,
}

#[derive(Args, Debug)]
pub struct PackingArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub library: LibraryArgs,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub library: LibraryArgs,
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MDTS_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!(
                "MDTS_THREADS must be a positive integer, got '{v}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

fn run(args: Vec<OsString>) -> Result<(), CliError> {
    let args = config::merge_config(&Cli::command(), args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    init_threads()?;
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Compress(a) => commands::compress(&a),
        Command::Decompress(a) => commands::decompress(&a),
        Command::Typical(a) => commands::typical(&a),
        Command::Packing(a) => commands::packing(&a),
        Command::Coverage(a) => commands::coverage(&a),
        Command::Experiment(a) => experiment::run(&a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("mdts: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("mdts: error: {msg}");
            ExitCode::from(1)
        }
    }
}
