//! Command-line front end: binds a JSON experiment config to a CSV artifact.
//!
//! Exit codes: 0 success, 1 config error, 2 solver non-convergence,
//! 3 invariant violation (an expectation stated in the config failed).

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use warpcd_core::config::{run_config_text, RunOverrides};

#[derive(Parser)]
#[command(name = "warpcd", version, about = "Warped-product geometry experiments")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output CSV path; overrides the config's `output` field. Defaults to
    /// stdout when neither is given.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (also settable via WARPCD_THREADS; the flag wins).
    #[arg(long)]
    threads: Option<usize>,

    /// Seed override for all sampled randomness.
    #[arg(long)]
    seed: Option<u64>,

    /// Suppress timestamp and timing header fields so reruns are
    /// byte-identical.
    #[arg(long)]
    reproducible: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let overrides = RunOverrides {
        seed: cli.seed,
        threads: cli.threads,
        reproducible: cli.reproducible,
    };
    match run_config_text(&text, &overrides) {
        Ok((csv, status, config_out)) => {
            let out_path = cli.out.or(config_out.map(PathBuf::from));
            match out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, csv) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{csv}"),
            }
            ExitCode::from(status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
