//! `pplab` command line: one subcommand per experiment kind.
//!
//! Exit codes: 0 = all checks pass, 1 = statistical rejection,
//! 2 = configuration or runtime error.

use clap::{Args, Parser, Subcommand};
use pplab_cli::config::{default_config, ConfigError, ExperimentConfig};
use pplab_cli::experiments::{describe, run_experiment, RunError};
use pplab_cli::report::{emit_report, ReportFormat};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pplab",
    about = "Monte Carlo lab for Poisson-process limits of runs and Voronoi extreme radii"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration; defaults to the built-in
    /// acceptance-scale configuration for the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for report.json and the CSV bundle.
    #[arg(long, default_value = "pplab-out")]
    out: PathBuf,
    /// Print the resolved schedule and exit without running.
    #[arg(long)]
    describe: bool,
    /// Emit report.json only, without the CSV bundle.
    #[arg(long)]
    json_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// k-head runs in Bernoulli arrays vs the Lebesgue half-line target.
    Runs(CommonArgs),
    /// Transformed Voronoi inradii vs the exponential-tail target.
    Inradius(CommonArgs),
    /// The 2^d-variant of the inradius transform.
    InradiusHat(CommonArgs),
    /// Transformed circumscribed radii vs the power-law target.
    Circumradius(CommonArgs),
    /// Coupled sandwich bounds for a discontinuous intensity.
    Sandwich(CommonArgs),
    /// Monte Carlo estimation of p_k and alpha_2.
    PkEstimate(CommonArgs),
    /// False-alarm calibration of the gof battery on exact targets.
    NullCalibration(CommonArgs),
}

impl Command {
    fn kind(&self) -> &'static str {
        match self {
            Command::Runs(_) => "runs",
            Command::Inradius(_) => "inradius",
            Command::InradiusHat(_) => "inradius_hat",
            Command::Circumradius(_) => "circumradius",
            Command::Sandwich(_) => "sandwich",
            Command::PkEstimate(_) => "pk_estimate",
            Command::NullCalibration(_) => "null_calibration",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Runs(a)
            | Command::Inradius(a)
            | Command::InradiusHat(a)
            | Command::Circumradius(a)
            | Command::Sandwich(a)
            | Command::PkEstimate(a)
            | Command::NullCalibration(a) => a,
        }
    }
}

fn resolve_config(kind: &str, args: &CommonArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => default_config(kind).expect("every subcommand has a default"),
    };
    if config.experiment.kind_name() != kind {
        return Err(ConfigError::KindMismatch {
            expected: kind.into(),
            got: config.experiment.kind_name().into(),
        });
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let args = cli.command.args();

    let config = match resolve_config(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };

    if args.describe {
        match describe(&config) {
            Ok(lines) => {
                for line in lines {
                    println!("{line}");
                }
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                return ExitCode::from(2);
            }
        }
    }

    match run_experiment(&config) {
        Ok((report, bundle)) => {
            let out_dir = args.out.join(kind);
            let format = if args.json_only {
                ReportFormat::Json
            } else {
                ReportFormat::CsvBundle
            };
            if let Err(e) = emit_report(&report, &bundle, &out_dir, format) {
                eprintln!("could not write report: {e}");
                return ExitCode::from(2);
            }
            for entry in &report.entries {
                println!(
                    "{} @ {}: {}",
                    kind,
                    entry.schedule_point,
                    if entry.pass { "pass" } else { "REJECT" }
                );
                for ks in &entry.ks {
                    println!(
                        "  KS[{} vs {}] = {:.4} (n = {}, threshold {:.4})",
                        ks.statistic, ks.target, ks.ks, ks.sample_size, ks.threshold
                    );
                }
                for m in entry.metrics.iter().filter(|m| m.pass.is_some()) {
                    println!(
                        "  {} = {:.6}{} target {:.6} tol {:.6}: {}",
                        m.name,
                        m.value,
                        m.std_error
                            .map(|s| format!(" (se {s:.2e})"))
                            .unwrap_or_default(),
                        m.target.unwrap_or(f64::NAN),
                        m.tolerance.unwrap_or(f64::NAN),
                        if m.pass == Some(true) { "pass" } else { "REJECT" },
                    );
                }
                if let Some(gof) = &entry.gof {
                    let failed = gof.checks.iter().filter(|c| !c.pass).count();
                    println!(
                        "  gof: {}/{} checks pass (level {}, Bonferroni over {})",
                        gof.checks.len() - failed,
                        gof.checks.len(),
                        gof.level,
                        gof.bonferroni_checks
                    );
                }
            }
            println!(
                "report: {} ({:.1} s)",
                out_dir.join("report.json").display(),
                report.runtime_seconds
            );
            if report.overall_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(RunError::Simulation(e)) => {
            eprintln!("simulation error: {e}");
            ExitCode::from(2)
        }
    }
}
