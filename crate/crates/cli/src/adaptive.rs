use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ierk_core::{ControllerConfig, Integrator, ManufacturedCase, StepController, StepRecord, Trajectory};
use serde::Serialize;

use crate::config::{self, Case, RunConfig, DEFAULT_GRID};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub case: String,
    pub tableau: String,
    pub strategy: String,
    pub max_err_mix: Option<f64>,
    pub steps: usize,
    pub rejects: usize,
    pub seed: Option<u64>,
    pub wall_time: f64,
    pub grid: usize,
    pub t_end: f64,
}

/// Reference amplitude row for overlays.
#[derive(Debug, Serialize)]
struct FixtureRow {
    t: f64,
    f: f64,
    enstrophy: f64,
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Keeps rejected attempts, every `every`-th accepted step and the last step.
pub fn thin(records: &[StepRecord], every: usize) -> Vec<StepRecord> {
    let last = records.len().saturating_sub(1);
    records
        .iter()
        .enumerate()
        .filter(|&(k, r)| r.rejected || k == last || r.n % every == 0)
        .map(|(_, r)| *r)
        .collect()
}

pub fn write_csv(records: &[StepRecord], out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["n", "t", "tau", "enstrophy", "dtau_norm", "err_mix_inf", "rejected"])?;
    }
    w.flush()?;
    Ok(())
}

fn write_fixture(case: &ManufacturedCase, tr: &Trajectory, out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(FixtureRow {
        t: 0.0,
        f: case.amplitude(0.0),
        enstrophy: case.enstrophy(0.0),
    })?;
    for r in tr.accepted() {
        w.serialize(FixtureRow {
            t: r.t,
            f: case.amplitude(r.t),
            enstrophy: case.enstrophy(r.t),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let case = Case::resolve(cfg, "example2")?;
    let t_end = config::validate_positive("t_end", case.t_end())?;
    let tab = config::tableau(
        cfg.tableau.as_deref().unwrap_or("ierk23"),
        cfg.param,
        cfg.allow_unstable.unwrap_or(false),
    )?;
    let m = cfg.grid.unwrap_or(DEFAULT_GRID);
    let every = cfg.every.unwrap_or(1);
    if every == 0 {
        return Err(CliError::Validation("every must be at least 1".into()));
    }
    if cfg.output.fixture.is_some() && case.manufactured().is_none() {
        return Err(CliError::Validation("a fixture needs a case with an exact solution".into()));
    }
    let g = config::grid(m)?;
    let mut prob = case.problem(&g)?;
    if let Some(p) = cfg.placement {
        prob = prob.with_placement(p);
    }
    if let Some(c) = cfg.convection {
        prob = prob.with_convection(c);
    }
    let mut it = Integrator::new(prob, tab.clone())?;
    if let Some(exact) = case.exact() {
        it = it.with_exact(exact);
    }
    let omega0 = case.initial(&g);

    let start = Instant::now();
    let (tr, strategy) = match cfg.tau {
        Some(tau) => {
            let tau = config::validate_positive("tau", tau)?;
            (it.run_fixed(omega0, 0.0, tau, t_end, &mut ())?, "fixed".to_string())
        }
        None => {
            let ctl_cfg = cfg.controller.unwrap_or_default();
            let mut ctl = StepController::new(ctl_cfg)?;
            (it.run_adaptive(omega0, 0.0, t_end, &mut ctl, &mut ())?, ctl_cfg.strategy.name().to_string())
        }
    };
    let wall_time = start.elapsed().as_secs_f64();

    let summary = Summary {
        case: case.name(),
        tableau: tab.label(),
        strategy,
        max_err_mix: tr.max_err_mix(),
        steps: tr.steps(),
        rejects: tr.rejections(),
        seed: case.seed(),
        wall_time,
        grid: m,
        t_end,
    };
    let rows = thin(&tr.records, every);
    let json = serde_json::to_string_pretty(&summary)?;
    match &cfg.output.csv {
        Some(p) => write_csv(&rows, create(p)?)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    if let (Some(p), Some(c)) = (&cfg.output.fixture, case.manufactured()) {
        write_fixture(c, &tr, create(p)?)?;
    }
    match (&cfg.output.summary, &cfg.output.csv) {
        (Some(p), _) => writeln!(create(p)?, "{json}")?,
        (None, Some(_)) => println!("{json}"),
        (None, None) => eprintln!("{json}"),
    }
    Ok(())
}

/// Applies command-line controller flags on top of the file's `[controller]` table.
pub fn merge_controller(base: Option<ControllerConfig>, flags: &ControllerFlags) -> Option<ControllerConfig> {
    if base.is_none() && flags.is_empty() {
        return None;
    }
    let mut c = base.unwrap_or_default();
    let f = flags;
    c.tau_min = f.tau_min.unwrap_or(c.tau_min);
    c.tau_max = f.tau_max.unwrap_or(c.tau_max);
    c.beta = f.beta.unwrap_or(c.beta);
    c.r_star = f.r_star.unwrap_or(c.r_star);
    c.d_max = f.d_max.unwrap_or(c.d_max);
    c.gamma_tol = f.gamma_tol.unwrap_or(c.gamma_tol);
    c.beta_thr = f.beta_thr.unwrap_or(c.beta_thr);
    c.strategy = f.strategy.unwrap_or(c.strategy);
    Some(c)
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct ControllerFlags {
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub r_star: Option<f64>,
    #[arg(long)]
    pub d_max: Option<usize>,
    #[arg(long)]
    pub gamma_tol: Option<f64>,
    #[arg(long)]
    pub beta_thr: Option<f64>,
    /// ats, ats-ld or ats-ldlb.
    #[arg(long, value_parser = |s: &str| s.parse::<ierk_core::Strategy>().map_err(|e| e.to_string()))]
    pub strategy: Option<ierk_core::Strategy>,
}

impl ControllerFlags {
    fn is_empty(&self) -> bool {
        self.tau_min.is_none()
            && self.tau_max.is_none()
            && self.beta.is_none()
            && self.r_star.is_none()
            && self.d_max.is_none()
            && self.gamma_tol.is_none()
            && self.beta_thr.is_none()
            && self.strategy.is_none()
    }
}
