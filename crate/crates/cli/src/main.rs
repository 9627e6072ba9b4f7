use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use stairsplit::experiments::{
    compare, compare_csv, default_etas, default_omegas, excess, excess_csv, sor_csv, sor_sweep,
    verify, SorOptions, Suite,
};
use stairsplit::generators::{GeneratorSpec, QueueParams};
use stairsplit::SorKind;

#[derive(Parser)]
#[command(name = "stairsplit", version, about = "Spectral comparison of regular splittings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radii of GS, stair and AGS on random lower Hessenberg M-matrices.
    Compare {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radii and iterations to reach 0.01 as the excess eta shrinks.
    Excess {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated eta values (default: 50 log-spaced values in [1e-8, 10]).
        #[arg(long, value_delimiter = ',')]
        eta_list: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radii of GSOR, STSOR, STSOR2 and AGSOR over a grid of omega.
    SorSweep {
        /// Input family; defaults to `file` when --matrix is given, else `two-queue`.
        #[arg(long, value_enum)]
        source: Option<Source>,
        /// Matrix Market file.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Block sizes, one per line.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 21)]
        queue_n: usize,
        #[arg(long, default_value_t = 5)]
        servers: usize,
        #[arg(long, default_value_t = 0.9)]
        lambda: f64,
        #[arg(long, default_value_t = 0.1)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda1: f64,
        /// Comma-separated omega values (default: 0.05 to 2.10 step 0.05).
        #[arg(long, value_delimiter = ',')]
        omega_list: Option<Vec<f64>>,
        /// Use block splittings with the source's partition.
        #[arg(long)]
        block: bool,
        /// Reverse the index order (for upper Hessenberg inputs).
        #[arg(long)]
        flip: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    TwoQueue,
    RandomHessenberg,
    Excess,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Theorems,
    Exchange,
    Substitution,
    Singular,
    Walks,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Theorems => Suite::Theorems,
            SuiteArg::Exchange => Suite::Exchange,
            SuiteArg::Substitution => Suite::Substitution,
            SuiteArg::Singular => Suite::Singular,
            SuiteArg::Walks => Suite::Walks,
            SuiteArg::All => Suite::All,
        }
    }
}

enum Failure {
    Usage(String),
    Verify,
}

impl From<stairsplit::Error> for Failure {
    fn from(e: stairsplit::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn log(value: serde_json::Value) {
    eprintln!("{value}");
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compare { n, trials, seed, out } => {
            log(json!({
                "command": "compare",
                "generator": GeneratorSpec::random_hessenberg(n, seed),
                "trials": trials,
                "trial_seeds": "seed + trial index",
            }));
            let rows = compare(n, trials, seed)?;
            emit(&compare_csv(&rows), out.as_ref())
        }
        Command::Excess { n, seed, eta_list, out } => {
            let etas = eta_list.unwrap_or_else(default_etas);
            if let Some(bad) = etas.iter().find(|e| !(**e > 0.0)) {
                return Err(Failure::Usage(format!("eta must be positive, got {bad}")));
            }
            log(json!({
                "command": "excess",
                "generator": GeneratorSpec::excess(n, etas[0], seed),
                "etas": etas,
            }));
            let rows = excess(n, &etas, seed)?;
            emit(&excess_csv(&rows), out.as_ref())
        }
        Command::SorSweep {
            source,
            matrix,
            partition,
            n,
            seed,
            eta,
            queue_n,
            servers,
            lambda,
            mu,
            lambda1,
            omega_list,
            block,
            flip,
            out,
        } => {
            let source = source.unwrap_or(if matrix.is_some() {
                Source::File
            } else {
                Source::TwoQueue
            });
            let spec = match source {
                Source::File => {
                    let path = matrix
                        .ok_or_else(|| Failure::Usage("--source file needs --matrix".into()))?;
                    GeneratorSpec::file(path, partition)
                }
                Source::TwoQueue => GeneratorSpec::two_queue(QueueParams {
                    n: queue_n,
                    s: servers,
                    lambda,
                    mu,
                    lambda1,
                }),
                Source::RandomHessenberg => GeneratorSpec::random_hessenberg(n, seed),
                Source::Excess => GeneratorSpec::excess(
                    n,
                    eta.ok_or_else(|| Failure::Usage("--source excess needs --eta".into()))?,
                    seed,
                ),
            };
            let omegas = omega_list.unwrap_or_else(default_omegas);
            log(json!({
                "command": "sor-sweep",
                "generator": spec,
                "omegas": omegas,
                "block": block,
                "flip": flip,
            }));
            let (a, part) = spec.build()?;
            let sweep = sor_sweep(&a, part.as_ref(), &omegas, SorOptions { block, flip })?;
            let faster = sweep.faster_classic().map(|k| match k {
                SorKind::Agsor => "AGSOR",
                _ => "GSOR",
            });
            log(json!({
                "singular": sweep.singular,
                "flipped": sweep.flipped,
                "faster_near_omega_1": faster,
            }));
            emit(&sor_csv(&sweep.rows), out.as_ref())
        }
        Command::Verify {
            suite,
            seed,
            trials,
            out,
        } => {
            let report = verify(suite.into(), seed, trials)?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            emit(&(text + "\n"), out.as_ref())?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
