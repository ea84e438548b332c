use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ncx::suites::{run_suite, DEFAULT_SUITE_SEED, SUITE_NAMES};
use ncx::{parse_scenario, run, RunOptions};

/// Exit code when a scenario cannot be read or validated.
const EXIT_INPUT: u8 = 2;
/// Exit code when a consistency assertion was falsified.
const EXIT_FALSIFIED: u8 = 3;

#[derive(Parser)]
#[command(name = "ncx", version, about = "Ergodic optimization on finite-dimensional C*-dynamical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's k_max.
        #[arg(long)]
        k_max: Option<usize>,
        /// Override the scenario's tolerance for Følner-limit checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Run independent tasks in parallel.
        #[arg(long)]
        parallel: bool,
        /// Keep full convergence traces in the report.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Run acceptance suites; exits 0 iff every criterion passes.
    Check {
        /// gauge-oracle, orbit, jordan, quotient, uergodic, model, kb,
        /// exposing, projector, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SUITE_SEED)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            k_max,
            tol,
            seed,
            out,
            format,
            parallel,
            verbose,
        } => {
            let text = match std::fs::read_to_string(&scenario) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", scenario.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            let mut sc = match parse_scenario(&text) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: invalid scenario {}: {e}", scenario.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            if let Some(k) = k_max {
                if k == 0 {
                    eprintln!("error: --k-max must be positive");
                    return ExitCode::from(EXIT_INPUT);
                }
                sc.tolerances.k_max = k;
            }
            if let Some(t) = tol {
                if !(t.is_finite() && t > 0.0) {
                    eprintln!("error: --tol must be positive");
                    return ExitCode::from(EXIT_INPUT);
                }
                sc.tolerances.tol = t;
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            let report = run(&sc, &RunOptions { parallel, verbose });
            let rendered = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_INPUT);
                    }
                    eprint!("{}", summary_line(&report));
                }
                None => print!("{rendered}"),
            }
            if report.falsification.is_some() {
                ExitCode::from(EXIT_FALSIFIED)
            } else if report.summary.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Check { suite, seed } => {
            let Some(results) = run_suite(&suite, seed) else {
                eprintln!("error: unknown suite `{suite}`; expected all or one of {}", SUITE_NAMES.join(", "));
                return ExitCode::from(EXIT_INPUT);
            };
            for c in &results {
                println!("{}", c.line());
            }
            let passed = results.iter().filter(|c| c.passed).count();
            println!("{passed}/{} criteria passed (seed {seed})", results.len());
            if passed == results.len() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn summary_line(report: &ncx::Report) -> String {
    let s = &report.summary;
    format!(
        "{} of {} tasks run, {} failed; checks {}/{} passed\n",
        s.executed, s.tasks, s.failed, s.checks_passed, s.checks
    )
}
