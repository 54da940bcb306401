//! `dcflex` — run grid/datacenter co-simulation experiments from the shell:
//! synthesize a world, split a decoupling budget, simulate the evaluation
//! days, and aggregate report tables.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (solver, I/O), 2 on a
//! config or validation error (including bad flags).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Experiment, Overrides};

/// A command failure, split by whose fault it is: bad inputs exit 2,
/// everything else exits 1.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

pub fn config_err(e: anyhow::Error) -> Failure {
    Failure::Config(e)
}

pub fn runtime_err(e: anyhow::Error) -> Failure {
    Failure::Runtime(e)
}

#[derive(Parser)]
#[command(
    name = "dcflex",
    version,
    about = "Grid/datacenter co-simulation: budget distribution, load management, reports"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic grid and day scenarios as files.
    Synth(SynthArgs),
    /// Split each budget across sites and write allocation tables.
    Distribute(RunArgs),
    /// Simulate the evaluation days and write outcome tables.
    Simulate(RunArgs),
    /// Aggregate simulate outputs into report tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML); defaults apply without one.
    config: Option<PathBuf>,
    /// Grid JSON file (scenario CSVs expected next to it).
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Seed for the synthetic grid (ignored when a grid file is given).
    #[arg(long)]
    seed: Option<u64>,
    /// Budget fractions of the unconstrained decoupling need, e.g. 0,0.5,1.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<f64>>,
    /// Distribution methods: even, opt.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Management approaches: plan-share, ps-gridscale, grid-ctrl.
    #[arg(long, value_delimiter = ',')]
    approaches: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fraction of scenarios used for training (budget fitting).
    #[arg(long)]
    train_frac: Option<f64>,
    /// Worker threads for scenario-level parallelism (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            grid: self.grid.clone(),
            seed: self.seed,
            budgets: self.budgets.clone(),
            methods: self.methods.clone(),
            approaches: self.approaches.clone(),
            out: self.out.clone(),
            train_frac: self.train_frac,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Experiment config file, used only to locate the output directory.
    config: Option<PathBuf>,
    /// Directory holding simulate outputs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write grid.json, profiles.csv, scenarios.csv into.
    #[arg(long, default_value = "world")]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    buses: usize,
    #[arg(long, default_value_t = 3)]
    dcs: usize,
    /// Wind share of demand energy, percent.
    #[arg(long, default_value_t = 30.0)]
    wind_pct: f64,
    /// Solar share of demand energy, percent.
    #[arg(long, default_value_t = 30.0)]
    solar_pct: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Scenarios per (season, weekday/weekend) combination.
    #[arg(long, default_value_t = 1)]
    variants: usize,
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Synth(args) => {
            let opts = dcflex_core::grid::SynthOptions {
                n_buses: args.buses,
                n_dcs: args.dcs,
                wind_pct: args.wind_pct,
                solar_pct: args.solar_pct,
                seed: args.seed,
                horizon: args.horizon,
                variants_per_day_type: args.variants,
                train_frac: args.train_frac,
            };
            commands::cmd_synth(&opts, &args.out)
        }
        Cmd::Distribute(args) => {
            let exp = Experiment::load(args.config.as_deref(), &args.overrides())?;
            commands::cmd_distribute(&exp)
        }
        Cmd::Simulate(args) => {
            let jobs = args.jobs;
            let exp = Experiment::load(args.config.as_deref(), &args.overrides())?;
            commands::cmd_simulate(&exp, jobs)
        }
        Cmd::Report(args) => {
            let out = match (&args.out, &args.config) {
                (Some(dir), _) => dir.clone(),
                (None, Some(cfg)) => {
                    Experiment::load(Some(cfg), &Overrides::default())?.out_dir
                }
                (None, None) => PathBuf::from("out"),
            };
            commands::cmd_report(&out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
