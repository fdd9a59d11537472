use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parnewton_core::convergence::{DEFAULT_CEIL as CEIL, DEFAULT_FLOOR as FLOOR};
use parnewton_cli::rates::{cmd_rates, TruthSpec};
use parnewton_cli::{audit, exit, run};

#[derive(Parser)]
#[command(name = "parnewton", version, about = "Generalised Newton experiments on manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments, writing trace.csv and summary.json per config.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (one subdirectory per config when several are given).
        #[arg(long)]
        out: PathBuf,
        /// Configs to run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Replaces the config's top-level seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Audit the parametrisation pairs of a config, writing audit.json.
    Audit {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Re-estimate the convergence rate from a stored trace.
    Rates {
        trace: PathBuf,
        /// column | self[@M] | coords:x1,x2,…[@M]
        #[arg(long)]
        truth: String,
        #[arg(long, default_value_t = FLOOR)]
        floor: f64,
        #[arg(long, default_value_t = CEIL)]
        ceil: f64,
    },
}

fn fail(e: parnewton_cli::CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { configs, out, jobs, seed_override } => {
            let results = match run::run_batch(&configs, &out, jobs, seed_override) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let mut code = exit::OK;
            for (path, r) in configs.iter().zip(results) {
                let c = match r {
                    Ok(s) => {
                        let rate = s.rate.as_ref().map_or_else(|| "n/a".to_string(), |r| format!("{:.4}", r.rate));
                        println!("{}: {:?} after {} iterations, K = {rate}", path.display(), s.termination, s.iterations);
                        s.exit_code
                    }
                    Err(e) => {
                        eprintln!("{}: error: {e}", path.display());
                        e.exit_code()
                    }
                };
                code = code.max(c);
            }
            ExitCode::from(code)
        }
        Command::Audit { config, out, seed_override } => match audit::cmd_audit(&config, &out, seed_override) {
            Ok(s) => {
                for p in &s.pairs {
                    let verdict = if p.report.pass.all() { "pass" } else { "FAIL" };
                    println!("{}: {verdict}", p.pair);
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Rates { trace, truth, floor, ceil } => {
            let result = truth.parse::<TruthSpec>().and_then(|t| cmd_rates(&trace, &t, floor, ceil));
            match result {
                Ok(r) => {
                    print!("{}", run::to_json(&r));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
