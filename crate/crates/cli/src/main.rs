//! `nndlab` command-line runner. Every output embeds the full configuration
//! and seed: CSV gets a leading `# config:` comment line, JSON wraps the data
//! as `{"config": ..., "data": ...}`.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::{CrsCmd, DiagCmd, NndArgs, TwoNrqCmd};

#[derive(Debug, Parser)]
#[command(name = "nndlab", about = "Nearest-neighbor descent, concordant ranking systems and 2NRQ experiments")]
struct Cli {
    /// Worker threads for parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file. Defaults to `$NNDLAB_OUT_DIR/<experiment>.<ext>` when the
    /// variable is set, otherwise standard output.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run nearest-neighbor descent on an example space.
    Nnd(NndArgs),
    /// Radius schedule and torus simulation of second-neighbor range queries.
    #[command(name = "2nrq", subcommand)]
    TwoNrq(TwoNrqCmd),
    /// Concordant ranking system constructions and checks.
    #[command(subcommand)]
    Crs(CrsCmd),
    /// Diameter and expansion of random K-out graphs.
    #[command(subcommand)]
    Diag(DiagCmd),
}

fn version_string() -> String {
    let mut csv = Vec::new();
    let checksum = nndlab::twonrq::derive_params(1e7, 28.0, 4, 0.5)
        .and_then(|p| nndlab::twonrq::compute_schedule(&p))
        .and_then(|s| s.write_csv(&mut csv))
        .map(|_| output::sha256_hex(&csv))
        .unwrap_or_else(|e| format!("unavailable ({e})"));
    format!("{} (golden schedule sha256 {checksum})", env!("CARGO_PKG_VERSION"))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use nndlab::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::Refused(_)) => 4,
        Some(Error::Io(_) | Error::Csv(_) | Error::Json(_)) => 1,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    let version: &'static str = Box::leak(version_string().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Nnd(a) => commands::nnd(a),
        Command::TwoNrq(c) => commands::twonrq(c),
        Command::Crs(c) => commands::crs(c),
        Command::Diag(c) => commands::diag(c),
    }
    .and_then(|doc| output::emit(&doc, cli.format, cli.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
