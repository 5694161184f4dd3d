use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use projlab::commands::{cmd_angles, cmd_criteria, cmd_run, cmd_run_sweep, resolve_out_dir};
use projlab::error::Error;
use projlab::scenario::load_scenario;

/// Angle-based certification of uniform convergence for products of
/// projections.
///
/// Exit codes: 0 = pass, 1 = runtime error, 2 = criteria fail,
/// 3 = divergence abort.
#[derive(Parser)]
#[command(name = "projlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario file.
    Validate { scenario: PathBuf },
    /// Compute the pairwise angle table and write angles.csv.
    Angles {
        scenario: PathBuf,
        /// Output directory (defaults to the scenario's, then ".").
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the convergence criteria; writes criteria.json and
    /// criteria.csv. Exits 2 when any requested criterion fails.
    Criteria {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute the scenario's schedule and write trace.csv.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render trace.svg.
        #[arg(long)]
        svg: bool,
        /// Comma-separated seed sweep (random schedules only).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Parallel runs for a seed sweep.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn error_exit(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!(
                    "ok: dim {}, p {}, {} projectors",
                    s.space.dim,
                    s.space.p.0,
                    s.projectors.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => error_exit(&e),
        },
        Command::Angles { scenario, out } => {
            let s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return error_exit(&e),
            };
            let dir = resolve_out_dir(&s, out.as_deref());
            match cmd_angles(&s, &dir) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => error_exit(&e),
            }
        }
        Command::Criteria { scenario, out } => {
            let s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return error_exit(&e),
            };
            let dir = resolve_out_dir(&s, out.as_deref());
            match cmd_criteria(&s, &dir) {
                Ok(outcome) => {
                    for row in &outcome.rows {
                        let verdict = if row.pass { "pass" } else { "fail" };
                        let reason = outcome
                            .report
                            .hypotheses
                            .get(&row.name)
                            .map(|h| h.reason.as_str())
                            .unwrap_or("");
                        println!("{}: {} ({reason})", row.name, verdict);
                    }
                    println!(
                        "wrote {} and {}",
                        outcome.json_path.display(),
                        outcome.csv_path.display()
                    );
                    if outcome.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => error_exit(&e),
            }
        }
        Command::Run {
            scenario,
            out,
            svg,
            seeds,
            jobs,
        } => {
            let s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => return error_exit(&e),
            };
            let dir = resolve_out_dir(&s, out.as_deref());
            match seeds {
                Some(seeds) => match cmd_run_sweep(&s, &dir, svg, &seeds, jobs) {
                    Ok(results) => {
                        for (seed, summary) in &results {
                            println!(
                                "seed {seed}: final deviation {:e}, violations {}, k_tau {}",
                                summary.final_deviation,
                                summary.violations,
                                summary
                                    .k_tau
                                    .map(|k| k.to_string())
                                    .unwrap_or_else(|| "-".into())
                            );
                        }
                        ExitCode::SUCCESS
                    }
                    Err(e) => error_exit(&e),
                },
                None => match cmd_run(&s, &dir, svg, None) {
                    Ok(summary) => {
                        println!("steps: {}", summary.steps);
                        println!("final deviation: {:e}", summary.final_deviation);
                        println!("envelope: {}", summary.envelope_note);
                        println!("violations: {}", summary.violations);
                        if let Some(k) = summary.k_tau {
                            println!("k_tau: {k}");
                        }
                        println!("wrote {}", summary.trace_path.display());
                        if let Some(p) = summary.svg_path {
                            println!("wrote {}", p.display());
                        }
                        ExitCode::SUCCESS
                    }
                    Err(e) => error_exit(&e),
                },
            }
        }
    }
}
