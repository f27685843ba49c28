//! `privkit` command-line interface.
//!
//! Every subcommand prints one JSON document on standard output with a
//! top-level `"version": 1`. Exit codes: 0 success, 1 usage error, 2 data or
//! validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod error;
mod io;
pub mod pipeline;
mod rappor;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "privkit", version, about = "Privacy-preserving data toolkit")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a JSON-described transform pipeline over a CSV file.
    Anonymize(AnonymizeArgs),
    /// Report k-anonymity, l-diversity and equivalence classes.
    Metrics(MetricsArgs),
    /// RAPPOR encoding, reporting, simulation and estimation.
    #[command(subcommand)]
    Rappor(RapporCommand),
    /// Exact ε by enumerating output distributions, beside the closed form.
    Dpcheck(DpcheckArgs),
    /// Secret summation.
    #[command(subcommand)]
    Smc(SmcCommand),
    /// Association rule mining.
    #[command(subcommand)]
    Assoc(AssocCommand),
    /// Built-in example data.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Debug, Args)]
struct AnonymizeArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for randomized steps that do not set their own.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// Quasi-identifier attributes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    qi: Vec<String>,
    /// Sensitive attribute for l-diversity.
    #[arg(long)]
    sensitive: Option<String>,
}

#[derive(Debug, Subcommand)]
enum RapporCommand {
    /// Bloom-encode a value.
    Encode {
        /// Parameters as inline JSON or a file path.
        #[arg(long)]
        params: String,
        #[arg(long)]
        value: String,
    },
    /// Produce one client report as a JSON envelope.
    Report {
        #[arg(long)]
        params: String,
        #[arg(long)]
        value: String,
        /// Client secret keying the permanent response.
        #[arg(long)]
        secret: String,
        #[arg(long)]
        seed: u64,
    },
    /// ε∞, ε₁ and the report marginals q*, p*.
    Epsilon {
        #[arg(long)]
        params: String,
    },
    /// Simulate a population of clients.
    Simulate {
        #[arg(long)]
        params: String,
        #[arg(long)]
        clients: usize,
        /// Value shares as a JSON object, inline or a file path.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        seed: u64,
        /// Write report envelopes here as JSON lines instead of inline.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate candidate counts from report envelopes.
    Estimate {
        #[arg(long)]
        params: String,
        /// JSON lines (or a JSON array) of report envelopes.
        #[arg(long)]
        reports: PathBuf,
        /// Candidate values as a JSON array, inline or a file path.
        #[arg(long)]
        candidates: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Permanent response B -> B'.
    Prr,
    /// Full report B -> S.
    Report,
}

#[derive(Debug, Args)]
struct DpcheckArgs {
    #[arg(long)]
    params: String,
    #[arg(long, value_enum)]
    mode: Mode,
    /// First Bloom filter as a 0/1 string.
    #[arg(long)]
    bits1: String,
    /// Second Bloom filter as a 0/1 string.
    #[arg(long)]
    bits2: String,
}

#[derive(Debug, Subcommand)]
enum SmcCommand {
    /// Run the secret-sum protocol and print the full transcript.
    Demo {
        /// One vote per party, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        votes: Vec<u64>,
        #[arg(long, default_value_t = privkit_core::smc::DEFAULT_MODULUS)]
        modulus: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum AssocCommand {
    /// Mine rules meeting support and certainty thresholds.
    Mine(MineArgs),
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Transactions as a JSON array of item arrays.
    #[arg(long, conflicts_with_all = ["dataset", "schema", "columns"], required_unless_present = "dataset")]
    input: Option<PathBuf>,
    /// CSV dataset; each record becomes a transaction of `attribute=value` items.
    #[arg(long, requires_all = ["schema", "columns"])]
    dataset: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long, default_value_t = privkit_core::assoc::DEFAULT_MIN_SUPPORT)]
    min_support: f64,
    #[arg(long, default_value_t = privkit_core::assoc::DEFAULT_MIN_CERTAINTY)]
    min_certainty: f64,
    #[arg(long, default_value_t = 3)]
    max_itemset: usize,
}

#[derive(Debug, Subcommand)]
enum FixturesCommand {
    /// Write the medical-record fixtures and their schemas.
    Export {
        #[arg(long)]
        output_dir: PathBuf,
    },
}

/// Runs the CLI with `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if help { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if help { 0 } else { 1 };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> error::Result<()> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Data(format!("thread pool: {e}")))?;
    // Output is buffered so the closure can move onto the pool.
    let mut buf: Vec<u8> = Vec::new();
    let out_buf = &mut buf;
    let result = pool.install(move || match cli.command {
        Command::Anonymize(a) => commands::anonymize(&a.config, a.seed, out_buf),
        Command::Metrics(a) => {
            commands::metrics(&a.input, &a.schema, &a.qi, a.sensitive.as_deref(), out_buf)
        }
        Command::Rappor(c) => rappor::run(c, out_buf),
        Command::Dpcheck(a) => commands::dpcheck(&a.params, a.mode, &a.bits1, &a.bits2, out_buf),
        Command::Smc(SmcCommand::Demo {
            votes,
            modulus,
            seed,
        }) => commands::smc_demo(&votes, modulus, seed, out_buf),
        Command::Assoc(AssocCommand::Mine(a)) => commands::assoc_mine(&a, out_buf),
        Command::Fixtures(FixturesCommand::Export { output_dir }) => {
            commands::export_fixtures(&output_dir, out_buf)
        }
    });
    result?;
    out.write_all(&buf)?;
    Ok(())
}
