use std::io::Write;

use ierk_core::spectral::{l2_norm, velocity};
use ierk_core::{Integrator, ManufacturedCase, Tableau};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Case, RunConfig, DEFAULT_GRID};
use crate::error::{CliError, CliResult};

pub const DEFAULT_TABLEAUX: [&str; 3] = ["ierk23:0.35", "ierk35:1.2", "ierk47:-0.8"];

/// `0.1 * 2^-k` for `k = 0..=7`.
pub fn default_taus() -> Vec<f64> {
    (0..8).map(|k| 0.1 / f64::from(1 << k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub tableau: String,
    pub tau: f64,
    #[serde(rename = "err_L2_omega")]
    pub err_l2_omega: f64,
    #[serde(rename = "err_L2_u")]
    pub err_l2_u: f64,
    #[serde(rename = "err_L2_psi")]
    pub err_l2_psi: f64,
    pub observed_rate: Option<f64>,
}

fn errors(case: &ManufacturedCase, tab: &Tableau, m: usize, tau: f64) -> CliResult<(f64, f64, f64)> {
    let g = config::grid(m)?;
    let it = Integrator::new(case.problem(&g)?, tab.clone())?;
    let tr = it.run_fixed(case.exact_omega(&g, 0.0), 0.0, tau, case.t_end, &mut ())?;
    let s = &tr.final_state;
    let psi = case.exact_psi(&g, case.t_end);
    let vel = velocity(&psi);
    let eu = l2_norm(&s.vel.u.sub(&vel.u)?);
    let ev = l2_norm(&s.vel.v.sub(&vel.v)?);
    Ok((
        l2_norm(&s.omega.sub(&case.exact_omega(&g, case.t_end))?),
        eu.hypot(ev),
        l2_norm(&s.psi.sub(&psi)?),
    ))
}

/// Runs every `(tableau, tau)` pair; rows keep the input order.
pub fn study(case: &ManufacturedCase, tabs: &[Tableau], taus: &[f64], m: usize) -> CliResult<Vec<Row>> {
    let jobs: Vec<(usize, f64)> = (0..tabs.len()).flat_map(|i| taus.iter().map(move |&t| (i, t))).collect();
    let errs = jobs
        .par_iter()
        .map(|&(i, tau)| {
            errors(case, &tabs[i], m, tau).map_err(|e| e.context(format!("{} at tau = {tau}", tabs[i].label())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows: Vec<Row> = Vec::with_capacity(jobs.len());
    for (k, (&(i, tau), (eo, eu, ep))) in jobs.iter().zip(errs).enumerate() {
        let rate = match rows.last() {
            Some(prev) if jobs[k - 1].0 == i => Some((prev.err_l2_omega / eo).ln() / (prev.tau / tau).ln()),
            _ => None,
        };
        rows.push(Row {
            tableau: tabs[i].label(),
            tau,
            err_l2_omega: eo,
            err_l2_u: eu,
            err_l2_psi: ep,
            observed_rate: rate,
        });
    }
    Ok(rows)
}

pub fn write_csv(rows: &[Row], out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["tableau", "tau", "err_L2_omega", "err_L2_u", "err_L2_psi", "observed_rate"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_table(rows: &[Row]) -> String {
    let mut s = format!(
        "{:<18} {:>12} {:>12} {:>12} {:>12} {:>6}\n",
        "tableau", "tau", "err_omega", "err_u", "err_psi", "rate"
    );
    for r in rows {
        let rate = r.observed_rate.map_or_else(String::new, |v| format!("{v:.2}"));
        s += &format!(
            "{:<18} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>6}\n",
            r.tableau, r.tau, r.err_l2_omega, r.err_l2_u, r.err_l2_psi, rate
        );
    }
    s
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let case = match Case::resolve(cfg, "example1")? {
        Case::Manufactured(c) => c,
        Case::Decay { .. } => {
            return Err(CliError::Validation("converge needs a case with an exact solution".into()));
        }
    };
    config::validate_positive("t_end", case.t_end)?;
    let allow = cfg.allow_unstable.unwrap_or(false);
    let specs: Vec<String> = cfg
        .tableaux
        .clone()
        .or_else(|| cfg.tableau.clone().map(|t| vec![t]))
        .unwrap_or_else(|| DEFAULT_TABLEAUX.iter().map(|s| s.to_string()).collect());
    let tabs = specs
        .iter()
        .map(|s| config::tableau(s, cfg.param, allow))
        .collect::<CliResult<Vec<_>>>()?;
    let taus = cfg.taus.clone().unwrap_or_else(default_taus);
    if taus.is_empty() || tabs.is_empty() {
        return Err(CliError::Validation("need at least one tableau and one step size".into()));
    }
    for &t in &taus {
        config::validate_positive("tau", t)?;
    }
    let m = cfg.grid.unwrap_or(DEFAULT_GRID);
    let rows = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(e.to_string()))?
            .install(|| study(&case, &tabs, &taus, m))?,
        None => study(&case, &tabs, &taus, m)?,
    };
    let table = summary_table(&rows);
    match &cfg.output.csv {
        Some(path) => {
            write_csv(&rows, std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)?;
            print!("{table}");
        }
        None => {
            write_csv(&rows, std::io::stdout().lock())?;
            eprint!("{table}");
        }
    }
    Ok(())
}
