//! Command-line experiment runner.
//!
//! Exit codes: 0 success, 1 tolerance comparison failed, 2 configuration or
//! usage error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use siegert::config::ExperimentConfig;
use siegert::pipeline;
use siegert::report::RowStatus;

#[derive(Parser)]
#[command(
    name = "siegert",
    version,
    about = "Resonance energies and lifetimes from real basis-set stabilization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline for a TOML experiment config.
    Run {
        /// Path to the experiment configuration.
        config: PathBuf,
    },
    /// Check a resonances.csv against relative-error tolerances.
    Compare {
        /// Path to a resonances.csv produced by `run`.
        report: PathBuf,
        /// Relative tolerance on the width.
        #[arg(long, default_value_t = 0.05)]
        tol_gamma: f64,
        /// Relative tolerance on the energy.
        #[arg(long, default_value_t = 1e-3)]
        tol_energy: f64,
        /// Where to write the machine-readable verdict (default: next to the
        /// report).
        #[arg(long)]
        verdict: Option<PathBuf>,
    },
    /// Write the Hamiltonian factors H0 and W as CSV for debugging.
    DumpMatrices {
        /// Path to the experiment configuration.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run_cli() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

enum CliError {
    Config(siegert::config::ConfigError),
    Pipeline(pipeline::PipelineError),
    Report(siegert::report::ReportError),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Pipeline(e) => write!(f, "{e}"),
            CliError::Report(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            _ => ExitCode::from(3),
        }
    }
}

fn run_cli() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let config = ExperimentConfig::from_path(&config).map_err(CliError::Config)?;
            let outcome = pipeline::run(&config).map_err(CliError::Pipeline)?;
            let rows = &outcome.report.rows;
            let ok = rows.iter().filter(|r| r.status == RowStatus::Ok).count();
            println!(
                "localized {} resonance candidate(s); {} with oracle data",
                rows.len(),
                ok
            );
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            let t = &outcome.report.provenance.timings;
            println!(
                "timings: assembly {:.2}s, sweep {:.2}s, localize {:.2}s, oracle {:.2}s, total {:.2}s",
                t.assembly_s, t.sweep_s, t.localize_s, t.oracle_s, t.total_s
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            report,
            tol_gamma,
            tol_energy,
            verdict,
        } => {
            let result = pipeline::compare_report(&report, tol_gamma, tol_energy)
                .map_err(CliError::Report)?;
            println!(
                "{:>4} {:>12} {:>13} {:>13}  {}",
                "n0", "lambda_star", "energy_err", "gamma_err", "result"
            );
            for row in &result.rows {
                let fmt_err = |v: Option<f64>| match v {
                    Some(x) => format!("{x:13.4e}"),
                    None => format!("{:>13}", "-"),
                };
                println!(
                    "{:>4} {:>12.6} {} {}  {}{}",
                    row.n0,
                    row.lambda_star,
                    fmt_err(row.energy_rel_err),
                    fmt_err(row.gamma_rel_err),
                    if row.pass { "pass" } else { "FAIL" },
                    if row.note.is_empty() {
                        String::new()
                    } else {
                        format!(" ({})", row.note)
                    }
                );
            }
            if result.vacuous {
                println!("warning: no rows carried oracle data; vacuous pass");
            }
            println!(
                "checked {} row(s), {} failed (tol_gamma = {tol_gamma:e}, tol_energy = {tol_energy:e})",
                result.checked, result.failed
            );
            let verdict_path = verdict.unwrap_or_else(|| {
                report
                    .parent()
                    .unwrap_or_else(|| std::path::Path::new("."))
                    .join("verdict.json")
            });
            let text = serde_json::to_string_pretty(&result).expect("verdict serializes") + "\n";
            std::fs::write(&verdict_path, text).map_err(CliError::Io)?;
            println!("wrote {}", verdict_path.display());
            Ok(if result.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::DumpMatrices { config } => {
            let config = ExperimentConfig::from_path(&config).map_err(CliError::Config)?;
            let files = pipeline::dump_matrices(&config).map_err(CliError::Pipeline)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
