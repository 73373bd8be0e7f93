//! Command-line front end: `run`, `single`, `ablate` and `validate`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{parse_config, BaselineTStar, ConfigError, Overrides, RunConfig};
use crate::harness::{mean_at, run_campaign, Campaign, CampaignSummary, HarnessError};
use crate::output::{emit_results, emit_table1, OutputError, Table1, PAIR_LABELS};
use crate::seeker::Variant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_NON_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lisa-acq", version, about = "Bandit Nash-equilibrium seeking for laser pointing acquisition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo campaign.
    Run(CommonArgs),
    /// Run a single realization and log every iteration.
    Single(CommonArgs),
    /// Run the full and baseline variants on identical seeds.
    Ablate(CommonArgs),
    /// Check the configuration and print the effective values.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML (or .json) configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Acquisition threshold in μrad.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Measure at the commanded reference instead of the propagated plant.
    #[arg(long)]
    pub ideal_tracking: bool,
}

impl CommonArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            n_realizations: self.realizations,
            iterations: self.iterations,
            base_seed: self.seed,
            variant: self.variant,
            worker_count: self.workers,
            output_dir: self.output.clone(),
            threshold_murad: self.threshold,
            ideal_tracking: self.ideal_tracking,
        }
    }

    pub fn load(&self) -> Result<RunConfig, ConfigError> {
        parse_config(self.config.as_deref(), &self.overrides())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{0}")]
    NonConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Harness(_) | CliError::Output(_) => EXIT_RUNTIME,
            CliError::NonConverged(_) => EXIT_NON_CONVERGED,
        }
    }
}

/// Outcome of the paired full/baseline comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Ablation {
    pub full: CampaignSummary,
    pub baseline: CampaignSummary,
    /// `None` when the iteration to compare at is undefined.
    pub table: Option<Table1>,
}

impl Ablation {
    /// Baseline over full mean misalignment, per pair.
    pub fn ratios(&self) -> Option<[f64; 3]> {
        self.table
            .map(|t| std::array::from_fn(|i| t.baseline[i] / t.full[i]))
    }
}

fn campaign(cfg: &RunConfig, variant: Variant) -> Result<Campaign, HarnessError> {
    run_campaign(
        cfg.n_realizations,
        cfg.base_seed,
        &cfg.scenario(variant),
        cfg.worker_count,
    )
}

/// Runs both variants on the same seeds. When `out` is given, each variant's
/// traces and summary go to `out/<variant>/` and the table to `out/table1.csv`.
pub fn ablate(cfg: &RunConfig, out: Option<&Path>) -> Result<Ablation, CliError> {
    let full = campaign(cfg, Variant::Full)?;
    if let Some(dir) = out {
        emit_results(&full.results, &full.summary, cfg, Variant::Full, &dir.join("full"))?;
    }
    let full_mean = full.summary.mean_at_t_star;
    let full_t_star = full.summary.t_star_iter;
    let full_summary = full.summary;
    drop(full.results);

    let baseline = campaign(cfg, Variant::Baseline)?;
    if let Some(dir) = out {
        emit_results(
            &baseline.results,
            &baseline.summary,
            cfg,
            Variant::Baseline,
            &dir.join("baseline"),
        )?;
    }
    let baseline_mean = match cfg.baseline_t_star {
        BaselineTStar::Shared => full_t_star.map(|t| mean_at(&baseline.results, t)),
        BaselineTStar::Own => baseline.summary.mean_at_t_star,
    };
    let table = full_mean.zip(baseline_mean).map(|(full, baseline)| Table1 { full, baseline });
    if let (Some(t), Some(dir)) = (&table, out) {
        emit_table1(t, dir)?;
    }
    Ok(Ablation {
        full: full_summary,
        baseline: baseline.summary,
        table,
    })
}

fn report(summary: &CampaignSummary, label: &str) {
    match (summary.t_star_iter, summary.t_star_minutes, summary.mean_at_t_star) {
        (Some(t), Some(min), Some(m)) => println!(
            "{label}: t* = {t} iterations ({min:.2} min); mean at t*: y12 {:.4}, y13 {:.4}, y23 {:.4} μrad",
            m[0], m[1], m[2]
        ),
        _ => println!("{label}: no realization reached the threshold"),
    }
}

fn check_converged(summary: &CampaignSummary, label: &str) -> Result<(), CliError> {
    if summary.non_converged_seeds.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConverged(format!(
            "{label}: {} of {} realizations did not converge within {} iterations (seeds {:?})",
            summary.non_converged_seeds.len(),
            summary.n_realizations,
            summary.iterations,
            summary.non_converged_seeds
        )))
    }
}

fn cmd_run(cfg: &RunConfig) -> Result<(), CliError> {
    let c = campaign(cfg, cfg.variant)?;
    emit_results(&c.results, &c.summary, cfg, cfg.variant, &cfg.output_dir)?;
    report(&c.summary, cfg.variant.as_str());
    check_converged(&c.summary, cfg.variant.as_str())
}

fn cmd_single(cfg: &RunConfig) -> Result<(), CliError> {
    let single = RunConfig {
        n_realizations: 1,
        ..cfg.clone()
    };
    let c = campaign(&single, single.variant)?;
    let r = &c.results[0];
    println!("seed {} truth {:?}", r.seed, r.truth.delta_x0.map(|v| v.0));
    println!("k,y12,y13,y23,h1,h2,h3");
    for (k, (y, h)) in r.y.iter().zip(&r.h).enumerate() {
        println!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            k + 1,
            y[0],
            y[1],
            y[2],
            h[0],
            h[1],
            h[2]
        );
    }
    emit_results(&c.results, &c.summary, &single, single.variant, &single.output_dir)?;
    report(&c.summary, single.variant.as_str());
    check_converged(&c.summary, single.variant.as_str())
}

fn cmd_ablate(cfg: &RunConfig) -> Result<(), CliError> {
    let a = ablate(cfg, Some(&cfg.output_dir))?;
    report(&a.full, "full");
    report(&a.baseline, "baseline");
    if let (Some(t), Some(ratio)) = (a.table, a.ratios()) {
        println!("pair  full        baseline    ratio");
        for i in 0..3 {
            println!(
                "{}   {:<10.4}  {:<10.4}  {:.1}",
                PAIR_LABELS[i], t.full[i], t.baseline[i], ratio[i]
            );
        }
    }
    if !a.baseline.non_converged_seeds.is_empty() {
        log::warn!(
            "baseline: {} realizations did not converge",
            a.baseline.non_converged_seeds.len()
        );
    }
    check_converged(&a.full, "full")
}

fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let text = toml::to_string(cfg).map_err(|e| {
        ConfigError::Parse {
            path: PathBuf::from("<effective>"),
            message: e.to_string(),
        }
    })?;
    print!("{text}");
    println!("# config ok");
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let (args, f): (&CommonArgs, fn(&RunConfig) -> Result<(), CliError>) = match &cli.command {
        Command::Run(a) => (a, cmd_run),
        Command::Single(a) => (a, cmd_single),
        Command::Ablate(a) => (a, cmd_ablate),
        Command::Validate(a) => (a, cmd_validate),
    };
    let result = args.load().map_err(CliError::from).and_then(|cfg| f(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
