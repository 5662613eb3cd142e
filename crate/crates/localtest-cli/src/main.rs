//! Command-line runner for the verification suites.
//!
//! Exit codes: 0 = all checks passed, 1 = at least one check failed,
//! 2 = configuration error (bad flags, unreadable config, guard violation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use localtest::harness::{run_suite, ExperimentConfig, Report};
use localtest::Error;

#[derive(Parser)]
#[command(
    name = "localtest",
    about = "Run exact verification suites for the local-tester toolkit",
    long_about = "Runs families of exact identities and inequality-margin checks \
                  (Schur decompositions, tester localization, one-way measurement \
                  protocols, hard-instance distance bounds, block-encoding round \
                  trips, repetition tails) and emits a JSON or CSV report."
)]
struct Cli {
    /// Suite to run; equivalent to the subcommand form.
    #[arg(long, global = true)]
    suite: Option<String>,

    /// TOML configuration file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for all randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the report file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format: json or csv.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Shots for Monte-Carlo and simulation checks.
    #[arg(long, global = true)]
    shots: Option<u64>,

    #[command(subcommand)]
    command: Option<SuiteCommand>,
}

#[derive(Subcommand)]
enum SuiteCommand {
    /// Normal form, weak Schur sampling, twirl agreement.
    Schur,
    /// Localization equality and purity-projector identities.
    Localize,
    /// One-way measurement identities, chain, and simulation.
    Locc,
    /// Distance-bound margins and discrimination checks.
    Hardness,
    /// Block-encoding round trips.
    Blockenc,
    /// Exact repetition tails vs concentration bounds.
    Amplify,
    /// Every suite above.
    All,
}

impl SuiteCommand {
    fn as_str(&self) -> &'static str {
        match self {
            SuiteCommand::Schur => "schur",
            SuiteCommand::Localize => "localize",
            SuiteCommand::Locc => "locc",
            SuiteCommand::Hardness => "hardness",
            SuiteCommand::Blockenc => "blockenc",
            SuiteCommand::Amplify => "amplify",
            SuiteCommand::All => "all",
        }
    }
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(cmd) = &cli.command {
        config.suite = cmd.as_str().into();
    } else if let Some(suite) = &cli.suite {
        config.suite = suite.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(shots) = cli.shots {
        config.shots = shots;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.clone());
    }
    if let Some(format) = &cli.format {
        config.format = format.clone();
    }
    config.validate()?;
    Ok(config)
}

fn print_summary(report: &Report) {
    for check in &report.checks {
        let status = if check.pass { "pass" } else { "FAIL" };
        println!(
            "[{status}] {name}: lhs={lhs:.6e} rhs={rhs:.6e} margin={margin:.6e}",
            name = check.name,
            lhs = check.lhs,
            rhs = check.rhs,
            margin = check.margin,
        );
    }
    let failed = report.checks.iter().filter(|c| !c.pass).count();
    println!(
        "suite {}: {}/{} checks passed in {:.2}s",
        report.suite,
        report.checks.len() - failed,
        report.checks.len(),
        report.elapsed,
    );
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let config = build_config(cli)?;
    let report = run_suite(&config)?;
    print_summary(&report);
    if let Some(dir) = &config.out_dir {
        let path = report.emit(dir, &config.format)?;
        println!("report written to {}", path.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // Guard violations and bad configs are exit 2; so are I/O problems
        // reading the config or writing the report.
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
