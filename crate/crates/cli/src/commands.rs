use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetci::harness::{error_samples_prepared, simulate_prepared};
use hetci::{
    confidence_interval_with, coverage_table, iid_confidence_interval_with, CiOptions,
    CoverageReport, DesignKind, Family, MixtureModel, PreparedConfig, SimulationConfig,
    SingletonPolicy,
};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::ingest;
use crate::manifest::RunManifest;
use crate::output::{self, ErrorSummary};

#[derive(Debug, Parser)]
#[command(name = "hetci", version, about = "Quantile confidence intervals for grouped, heterogeneous data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confidence interval for a quantile of a `value,group` CSV file.
    Ci(CiArgs),
    /// Coverage study for a single configuration.
    Simulate(SimulateArgs),
    /// Coverage table over a grid of configurations.
    Coverage(CoverageArgs),
    /// Per-replication estimation errors for one configuration.
    Errors(ErrorsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Singletons {
    Error,
    Drop,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Singletons::Error)]
    pub singletons: Singletons,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Warn when n·V̂ falls below this.
    #[arg(long, default_value_t = 10.0)]
    pub low_info_threshold: f64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 350)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, env = "HETCI_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub design: DesignKind,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// CSV with header `family,gamma,design`; defaults to the full
    /// 3 families x 4 gammas x 2 designs grid.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Also write one row of diagnostics per configuration here.
    #[arg(long)]
    pub details: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Draw every observation from the first group's distribution.
    #[arg(long)]
    pub homogeneous: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ci(a) => run_ci(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Coverage(a) => run_coverage(a),
        Command::Errors(a) => run_errors(a),
    }
}

fn write_with_manifest(out: &Path, contents: &str, manifest: &RunManifest) -> Result<()> {
    output::write_output(out, contents)?;
    if let Some(side) = output::sidecar(out, "manifest.json") {
        output::write_output(&side, &manifest.to_json())?;
    }
    Ok(())
}

fn run_ci(a: CiArgs) -> Result<()> {
    let bytes = std::fs::read(&a.input)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", a.input.display())))?;
    let policy = match a.singletons {
        Singletons::Error => SingletonPolicy::Error,
        Singletons::Drop => SingletonPolicy::Drop,
    };
    let data = ingest::ingest_reader(bytes.as_slice(), policy)?;
    for label in &data.dropped {
        eprintln!("dropped singleton group '{label}'");
    }
    let opts = CiOptions {
        low_information_threshold: a.low_info_threshold,
    };
    let het = confidence_interval_with(&data.sample, a.tau, a.alpha, opts)?;
    let iid = iid_confidence_interval_with(&data.sample, a.tau, a.alpha, opts)?;
    if het.low_information_warning {
        eprintln!(
            "warning: n*V = {} is below {}; the interval may be unreliable",
            het.n as f64 * het.variance,
            a.low_info_threshold
        );
    }
    let groups = data.sample.num_groups();
    let text = match a.format {
        Format::Json => output::ci_json(groups, &data.dropped, &het, &iid),
        Format::Csv => output::ci_csv(groups, &het, &iid),
    };
    let manifest = RunManifest::new(
        "ci",
        json!({
            "input": a.input.display().to_string(),
            "tau": a.tau,
            "alpha": a.alpha,
            "singletons": format!("{:?}", a.singletons).to_lowercase(),
            "format": format!("{:?}", a.format).to_lowercase(),
            "low_info_threshold": a.low_info_threshold,
        }),
        None,
        Some(&bytes),
    );
    write_with_manifest(&a.out, &text, &manifest)
}

fn config_from(model: &ModelArgs, run: &RunArgs) -> SimulationConfig {
    SimulationConfig {
        family: model.family,
        gamma: model.gamma,
        design: model.design,
        n: run.n,
        tau: run.tau,
        alpha: run.alpha,
        reps: run.reps,
        base_seed: run.seed,
    }
}

fn check_failures(report: &CoverageReport) -> Result<()> {
    if report.failures > 0 {
        return Err(CliError::Numerical(format!(
            "{} of {} replications failed for {}/{}/gamma={}",
            report.failures, report.reps, report.design, report.family, report.gamma
        )));
    }
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let config = config_from(&a.model, &a.run);
    let prepared = PreparedConfig::new(config.clone())?;
    let sim = simulate_prepared(&prepared, a.run.workers)?;
    let manifest = RunManifest::new(
        "simulate",
        serde_json::to_value(&config).expect("config serializes"),
        Some(config.base_seed),
        None,
    );
    write_with_manifest(&a.run.out, &output::reports_csv([&sim.report]), &manifest)?;
    check_failures(&sim.report)
}

pub fn read_grid(text: &str) -> Result<Vec<(Family, f64, DesignKind)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Validation(format!("grid: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["family", "gamma", "design"] {
        return Err(CliError::Validation(
            "grid: expected header 'family,gamma,design'".into(),
        ));
    }
    let mut cells = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Validation(format!("grid: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str, v: &str| CliError::Validation(format!("grid line {line}: bad {what} '{v}'"));
        let family: Family = row[0].parse().map_err(|_| bad("family", &row[0]))?;
        let gamma: f64 = row[1].parse().map_err(|_| bad("gamma", &row[1]))?;
        let design: DesignKind = row[2].parse().map_err(|_| bad("design", &row[2]))?;
        cells.push((family, gamma, design));
    }
    if cells.is_empty() {
        return Err(CliError::Validation("grid has no rows".into()));
    }
    Ok(cells)
}

fn run_coverage(a: CoverageArgs) -> Result<()> {
    let (cells, grid_bytes) = match &a.grid {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            (read_grid(&text)?, Some(text.into_bytes()))
        }
        None => {
            let cells = SimulationConfig::full_grid(0)
                .into_iter()
                .map(|c| (c.family, c.gamma, c.design))
                .collect();
            (cells, None)
        }
    };
    let configs: Vec<SimulationConfig> = cells
        .iter()
        .map(|&(family, gamma, design)| SimulationConfig {
            family,
            gamma,
            design,
            n: a.run.n,
            tau: a.run.tau,
            alpha: a.run.alpha,
            reps: a.run.reps,
            base_seed: a.run.seed,
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let results = coverage_table(&configs, a.run.workers)?;

    let mut reports = Vec::new();
    let mut problems = Vec::new();
    for (c, r) in configs.iter().zip(results) {
        match r {
            Ok(report) => {
                if let Err(e) = check_failures(&report) {
                    problems.push(e.to_string());
                }
                reports.push(report);
            }
            Err(e) => problems.push(format!("{}/{}/gamma={}: {e}", c.design, c.family, c.gamma)),
        }
    }

    let manifest = RunManifest::new(
        "coverage",
        json!({
            "grid": a.grid.as_ref().map(|p| p.display().to_string()),
            "cells": configs.len(),
            "n": a.run.n,
            "tau": a.run.tau,
            "alpha": a.run.alpha,
            "reps": a.run.reps,
        }),
        Some(a.run.seed),
        grid_bytes.as_deref(),
    );
    write_with_manifest(&a.run.out, &output::coverage_table_csv(&reports), &manifest)?;
    if let Some(details) = &a.details {
        write_with_manifest(details, &output::reports_csv(&reports), &manifest)?;
    }
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("{p}");
        }
        return Err(CliError::Numerical(format!(
            "{} of {} configurations failed",
            problems.len(),
            configs.len()
        )));
    }
    Ok(())
}

fn run_errors(a: ErrorsArgs) -> Result<()> {
    let config = config_from(&a.model, &a.run);
    let mut prepared = PreparedConfig::new(config.clone())?;
    if a.homogeneous {
        let first = prepared.model.components()[0];
        let model = MixtureModel::homogeneous(first, config.n)?;
        prepared = PreparedConfig::with_model(config.clone(), model)?;
    }
    let samples = error_samples_prepared(&prepared, a.run.workers)?;
    let summary = ErrorSummary {
        reps: config.reps,
        failures: samples.failures,
        var_error_het: samples.var_het,
        var_error_iid: samples.var_iid,
        ratio: samples.ratio,
        population_ratio: samples.population_ratio,
    };
    let mut cfg_json = serde_json::to_value(&config).expect("config serializes");
    cfg_json["homogeneous"] = json!(a.homogeneous);
    let manifest = RunManifest::new("errors", cfg_json, Some(config.base_seed), None);
    write_with_manifest(&a.run.out, &output::errors_csv(&samples.records), &manifest)?;
    let summary_text = output::error_summary_csv(&summary);
    match output::sidecar(&a.run.out, "summary.csv") {
        Some(path) => output::write_output(&path, &summary_text)?,
        None => eprint!("{summary_text}"),
    }
    if samples.failures > 0 {
        return Err(CliError::Numerical(format!(
            "{} of {} replications failed",
            samples.failures, config.reps
        )));
    }
    Ok(())
}
