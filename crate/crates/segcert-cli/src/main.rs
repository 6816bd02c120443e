//! Command-line surface for the certification engine.
//!
//! Subcommands: `certify` (offline certification from a counts file), `toy`
//! (synthetic power experiments), `kfwer` (error-budget sweeps), and
//! `metrics` (segmentation metrics over label files).
//!
//! Exit codes are stable: 0 success, 1 usage or configuration error, 2 data
//! or format error, 3 internal invariant violation.

mod cmd_certify;
mod cmd_kfwer;
mod cmd_metrics;
mod cmd_toy;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use segcert_cli::CliError;

#[derive(Parser)]
#[command(
    name = "segcert",
    version,
    about = "Certification engine for segmentation under randomized smoothing"
)]
struct Cli {
    /// Cap on worker threads (falls back to SEGCERT_THREADS, then all cores).
    /// Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify per-component decisions from an offline counts file
    Certify(cmd_certify::CertifyArgs),
    /// Synthetic-oracle power experiments over a parameter grid
    Toy(cmd_toy::ToyArgs),
    /// k-FWER error-budget sweeps over the component count
    Kfwer(cmd_kfwer::KfwerArgs),
    /// Segmentation metrics (accuracy, mIoU, abstain rate) over label files
    Metrics(cmd_metrics::MetricsArgs),
}

fn thread_cap(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(t) = flag {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        return Ok(Some(t));
    }
    match std::env::var("SEGCERT_THREADS") {
        Ok(v) => {
            let t: usize = v.parse().map_err(|_| {
                CliError::Usage(format!("SEGCERT_THREADS = '{v}' is not a thread count"))
            })?;
            if t == 0 {
                return Err(CliError::Usage("SEGCERT_THREADS must be at least 1".into()));
            }
            Ok(Some(t))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let dispatch = || match cli.command {
        Command::Certify(args) => cmd_certify::run(args),
        Command::Toy(args) => cmd_toy::run(args),
        Command::Kfwer(args) => cmd_kfwer::run(args),
        Command::Metrics(args) => cmd_metrics::run(args),
    };
    match thread_cap(cli.threads)? {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
            pool.install(dispatch)
        }
        None => dispatch(),
    }
}

fn main() -> std::process::ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return std::process::ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return std::process::ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::ExitCode::from(e.exit_code())
        }
    }
}
