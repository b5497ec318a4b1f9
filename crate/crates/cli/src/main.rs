//! `ierk`: tableau reports, convergence studies and adaptive runs.
//!
//! Exit status is 0 on success, 2 for invalid input (including an inadmissible
//! tableau) and 3 when the integration fails numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod adaptive;
mod config;
mod converge;
mod error;
mod tableau;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ierk_core::{ConvectionForm, ForcingPlacement};

use crate::adaptive::ControllerFlags;
use crate::config::{set, RunConfig};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "ierk", version, about = "Pseudo-spectral 2D Navier-Stokes with IMEX Runge-Kutta stepping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print coefficients, order-condition residuals and stability data of a tableau.
    Tableau {
        /// imex_euler, ierk23, ierk35 or ierk47, optionally as `name:parameter`.
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        param: Option<f64>,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Exit 0 even when the parameter is outside the positive-definite range.
        #[arg(long)]
        allow_unstable: bool,
    },
    /// Fixed-step error study against an exact solution; writes a rate table as CSV.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Tableau specs (`name` or `name:parameter`); repeat or comma-separate.
        #[arg(long = "tableau", value_delimiter = ',', allow_hyphen_values = true)]
        tableaux: Vec<String>,
        /// Step sizes; repeat or comma-separate.
        #[arg(long = "tau", value_delimiter = ',')]
        taus: Vec<f64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// One run with the adaptive controller (or a fixed step); writes per-step CSV and a JSON summary.
    Adaptive {
        #[command(flatten)]
        common: CommonArgs,
        /// Tableau spec (`name` or `name:parameter`).
        #[arg(long, allow_hyphen_values = true)]
        tableau: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        param: Option<f64>,
        /// Run with this constant step instead of the controller.
        #[arg(long)]
        fixed_tau: Option<f64>,
        #[command(flatten)]
        controller: ControllerFlags,
        /// Summary JSON path (default: stdout, or stderr when the CSV goes to stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Also write the exact amplitude and enstrophy at every accepted step.
        #[arg(long)]
        fixture: Option<PathBuf>,
        /// Keep every n-th accepted step in the CSV.
        #[arg(long)]
        every: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// example1, example2, example3-freqA, example3-freqB or decay.
    #[arg(long)]
    case: Option<String>,
    /// Grid points per direction.
    #[arg(long, short = 'm')]
    grid: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    /// Final time.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long, value_parser = config::parse_placement)]
    placement: Option<ForcingPlacement>,
    #[arg(long, value_parser = config::parse_convection)]
    convection: Option<ConvectionForm>,
    /// Seed for random initial data (`decay` case).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    allow_unstable: bool,
    /// CSV output path (default: stdout).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn into_config(self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::load_optional(self.config.as_deref())?;
        set(&mut cfg.case, self.case);
        set(&mut cfg.grid, self.grid);
        set(&mut cfg.nu, self.nu);
        set(&mut cfg.t_end, self.t_end);
        set(&mut cfg.placement, self.placement);
        set(&mut cfg.convection, self.convection);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.output.csv, self.output);
        if self.allow_unstable {
            cfg.allow_unstable = Some(true);
        }
        Ok(cfg)
    }
}

fn nonempty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Tableau {
            name,
            param,
            json,
            allow_unstable,
        } => tableau::run(&name, param, json, allow_unstable),
        Command::Converge {
            common,
            tableaux,
            taus,
            threads,
        } => {
            let mut cfg = common.into_config()?;
            set(&mut cfg.tableaux, nonempty(tableaux));
            set(&mut cfg.taus, nonempty(taus));
            set(&mut cfg.threads, threads);
            converge::run(&cfg)
        }
        Command::Adaptive {
            common,
            tableau,
            param,
            fixed_tau,
            controller,
            summary,
            fixture,
            every,
        } => {
            let mut cfg = common.into_config()?;
            set(&mut cfg.tableau, tableau);
            set(&mut cfg.param, param);
            set(&mut cfg.tau, fixed_tau);
            set(&mut cfg.output.summary, summary);
            set(&mut cfg.output.fixture, fixture);
            set(&mut cfg.every, every);
            cfg.controller = adaptive::merge_controller(cfg.controller, &controller);
            adaptive::run(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
