//! `christoffel`: experiments and estimates for regularized Christoffel functions.
//!
//! Every command computes its outputs in memory, then writes the CSV files and a
//! `run.json` record into `--out`. Exit codes: 0 on success, 1 on any error (no
//! files left behind), 2 on a malformed command line, 3 when outputs were
//! written but a hard check failed.

mod commands;
mod output;
mod options;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use output::{Artifacts, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] christoffel::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "christoffel", version, about = "Regularized Christoffel functions and density recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Christoffel values, leverage scores, density estimates and support labels.
    Estimate(commands::estimate::EstimateArgs),
    /// Density recovery and convergence rate on the sinusoidal density.
    Fig2(commands::fig2::Fig2Args),
    /// Small-sample overfitting: values at and between sample points.
    Overfit(commands::overfit::OverfitArgs),
    /// Gaussian against Matérn on a piecewise-constant density, with tail masses.
    GaussianCompare(commands::gaussian::GaussianArgs),
    /// D(λ), q₀ and the asymptotic predictors over a λ sweep.
    Spectral(commands::spectral::SpectralArgs),
    /// Extremal functions attaining C(z), sampled on a grid.
    #[command(hide = true)]
    OptimizerCurves(commands::curves::CurvesArgs),
}

struct Outcome {
    command: &'static str,
    config: Value,
    artifacts: Artifacts,
}

fn dispatch(command: &Command) -> Result<(Outcome, &Path), CliError> {
    fn pack<A: serde::Serialize>(
        command: &'static str,
        args: &A,
        artifacts: Artifacts,
    ) -> Result<Outcome, CliError> {
        let config = serde_json::to_value(args).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Outcome {
            command,
            config,
            artifacts,
        })
    }
    Ok(match command {
        Command::Estimate(a) => (pack("estimate", a, commands::estimate::run(a)?)?, &a.out.out),
        Command::Fig2(a) => (pack("fig2", a, commands::fig2::run(a)?)?, &a.out.out),
        Command::Overfit(a) => (pack("overfit", a, commands::overfit::run(a)?)?, &a.out.out),
        Command::GaussianCompare(a) => (
            pack("gaussian-compare", a, commands::gaussian::run(a)?)?,
            &a.out.out,
        ),
        Command::Spectral(a) => (pack("spectral", a, commands::spectral::run(a)?)?, &a.out.out),
        Command::OptimizerCurves(a) => (
            pack("optimizer-curves", a, commands::curves::run(a)?)?,
            &a.out.out,
        ),
    })
}

fn run_record(outcome: &Outcome) -> String {
    let a = &outcome.artifacts;
    let outputs: Vec<Value> = a
        .files
        .iter()
        .map(|(name, text)| json!({ "file": name, "rows": text.lines().count().saturating_sub(1) }))
        .collect();
    let record = json!({
        "command": outcome.command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": outcome.config,
        "seed": a.seed,
        "kernels": a.kernels,
        "systems": a.systems,
        "tolerances": commands::tolerances(),
        "outputs": outputs,
        "summary": a.summary,
        "checks": a.checks,
    });
    let mut text = serde_json::to_string_pretty(&record).expect("run record serializes");
    text.push('\n');
    text
}

fn write_all(dir: &Path, outcome: &Outcome) -> std::io::Result<()> {
    let mut out = OutputDir::create(dir)?;
    let record = run_record(outcome);
    let files = outcome
        .artifacts
        .files
        .iter()
        .map(|(n, t)| (n.as_str(), t.as_str()))
        .chain(std::iter::once(("run.json", record.as_str())));
    for (name, text) in files {
        if let Err(e) = out.write(name, text) {
            out.discard();
            return Err(e);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, dir) = match dispatch(&cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_all(dir, &outcome) {
        eprintln!("error: writing outputs to {}: {e}", dir.display());
        return ExitCode::from(1);
    }
    let failed: Vec<_> = outcome.artifacts.checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for c in failed {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    ExitCode::from(3)
}
