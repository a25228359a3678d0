use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use coherence_bound::problem::{self, RunOptions};

#[derive(Parser)]
#[command(
    version,
    about = "Lower bounds on coherence from interval-constrained expectation values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sample-refinement estimator on a problem file.
    Estimate {
        #[arg(long)]
        problem: PathBuf,
        /// Overrides the measure named in the problem file.
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Result record (JSON); printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-round trace (CSV).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the analytic bound of a bundled fixture (photon_l1, photon_geometric).
    Oracle { fixture: String },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Estimate {
            problem: path,
            measure,
            seed,
            tolerance,
            max_rounds,
            out,
            trace,
            threads,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring thread pool")?;
            }
            let p =
                problem::parse_problem(&path).map_err(|e| anyhow::anyhow!("[{}] {e}", e.code()))?;
            let options = RunOptions {
                measure,
                seed,
                tolerance,
                max_rounds,
            };
            let run = problem::run_estimate(&p, &options)
                .map_err(|e| anyhow::anyhow!("[{}] {e}", e.code()))?;
            let json = run.record.to_json();
            match out {
                Some(o) => std::fs::write(&o, json + "\n")
                    .with_context(|| format!("writing {}", o.display()))?,
                None => println!("{json}"),
            }
            if let Some(t) = trace {
                std::fs::write(&t, &run.trace)
                    .with_context(|| format!("writing {}", t.display()))?;
            }
            let bound = run
                .record
                .lower_bound
                .map_or("none".to_string(), |b| format!("{b:.6}"));
            eprintln!(
                "status: {}, lower_bound: {bound}, rounds: {}",
                run.record.status,
                run.record.rounds.len()
            );
            Ok(run.exit_code() as u8)
        }
        Command::Oracle { fixture } => {
            let report = problem::oracle_report(&fixture).map_err(|e| anyhow::anyhow!("{e}"))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
    }
}
