//! Run configuration shared by `converge` and `adaptive`.
//!
//! A config file is a TOML document whose keys mirror [`RunConfig`]; the
//! `[controller]` table uses the `ControllerConfig` field names. Command-line
//! flags override file values, which override built-in defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use ierk_core::manufactured::{example2, random_band_limited, CaseKind};
use ierk_core::{
    case_by_name, ControllerConfig, ConvectionForm, ExactSolution, Family, Field, ForcingPlacement, Grid,
    GridSpec, ManufacturedCase, Problem, Tableau,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID: usize = 128;
pub const DECAY_CASE: &str = "decay";
const DECAY_KMAX: i64 = 5;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<String>,
    pub nu: Option<f64>,
    pub t_end: Option<f64>,
    /// Pulse case overrides (`example2` only).
    pub lx: Option<u32>,
    pub lt: Option<f64>,
    pub t1: Option<f64>,
    pub period: Option<f64>,
    pub grid: Option<usize>,
    /// `name` or `name:parameter`.
    pub tableau: Option<String>,
    pub param: Option<f64>,
    pub tableaux: Option<Vec<String>>,
    pub taus: Option<Vec<f64>>,
    /// Fixed step for `adaptive`; disables the controller.
    pub tau: Option<f64>,
    pub placement: Option<ForcingPlacement>,
    pub convection: Option<ConvectionForm>,
    pub seed: Option<u64>,
    pub allow_unstable: Option<bool>,
    /// Write every n-th accepted step; rejected steps and the last step always appear.
    pub every: Option<usize>,
    pub threads: Option<usize>,
    pub controller: Option<ControllerConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub fixture: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    pub fn load_optional(path: Option<&Path>) -> CliResult<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Fills `slot` from the command line when given.
pub fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

pub fn parse_placement(s: &str) -> Result<ForcingPlacement, String> {
    match s.to_ascii_lowercase().as_str() {
        "explicit" => Ok(ForcingPlacement::Explicit),
        "implicit" => Ok(ForcingPlacement::Implicit),
        _ => Err(format!("expected `explicit` or `implicit`, got `{s}`")),
    }
}

pub fn parse_convection(s: &str) -> Result<ConvectionForm, String> {
    match s.to_ascii_lowercase().as_str() {
        "skew" => Ok(ConvectionForm::Skew),
        "advective" => Ok(ConvectionForm::Advective),
        _ => Err(format!("expected `skew` or `advective`, got `{s}`")),
    }
}

pub fn grid(m: usize) -> CliResult<Arc<Grid>> {
    Ok(Grid::new(GridSpec::periodic_2pi(m))?)
}

/// Parses `name` or `name:parameter`; `fallback` applies when no parameter is inline.
pub fn tableau(spec: &str, fallback: Option<f64>, allow_unstable: bool) -> CliResult<Tableau> {
    let (name, inline) = match spec.split_once(':') {
        Some((n, p)) => {
            let p = p
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad tableau parameter in `{spec}`")))?;
            (n, Some(p))
        }
        None => (spec, None),
    };
    let family: Family = name.parse()?;
    let tab = family.build(inline.or(fallback))?;
    if !allow_unstable {
        check_admissible(&tab)?;
    }
    Ok(tab)
}

pub fn check_admissible(tab: &Tableau) -> CliResult<()> {
    if tab.stability_report().positive_definite {
        return Ok(());
    }
    let range = tab.family().map_or("", |f| f.positive_definite_range());
    Err(CliError::Validation(format!(
        "{} is outside positive-definite range ({range}); pass --allow-unstable to run it anyway",
        tab.label()
    )))
}

/// A resolved case: either a manufactured solution or seeded random decay.
#[derive(Debug, Clone)]
pub enum Case {
    Manufactured(ManufacturedCase),
    Decay { nu: f64, t_end: f64, seed: u64 },
}

impl Case {
    pub fn resolve(cfg: &RunConfig, default: &str) -> CliResult<Self> {
        let name = cfg.case.as_deref().unwrap_or(default);
        if name.eq_ignore_ascii_case(DECAY_CASE) {
            return Ok(Case::Decay {
                nu: cfg.nu.unwrap_or(0.5),
                t_end: cfg.t_end.unwrap_or(10.0),
                seed: cfg.seed.unwrap_or(0),
            });
        }
        let mut case = case_by_name(name)?;
        let pulse_overrides = cfg.lx.is_some() || cfg.lt.is_some() || cfg.t1.is_some() || cfg.period.is_some();
        if pulse_overrides {
            let CaseKind::Pulse { schedule, lx } = &case.kind else {
                return Err(CliError::Validation(format!("case `{name}` takes no pulse overrides")));
            };
            if schedule.pulses() != 1 {
                return Err(CliError::Validation(format!(
                    "pulse overrides apply to single-pulse cases, `{name}` has {}",
                    schedule.pulses()
                )));
            }
            case = example2(
                cfg.lx.unwrap_or(*lx),
                cfg.lt.unwrap_or(schedule.frequencies[0]),
                cfg.t1.unwrap_or(schedule.breakpoints[1]),
                cfg.period.unwrap_or(schedule.period()),
                case.nu,
            )?
            .named(case.name.clone());
        }
        if let Some(nu) = cfg.nu {
            if !(nu > 0.0) {
                return Err(CliError::Validation(format!("viscosity must be positive, got {nu}")));
            }
            case = case.with_nu(nu);
        }
        if let Some(t) = cfg.t_end {
            case = case.with_t_end(t);
        }
        Ok(Case::Manufactured(case))
    }

    pub fn name(&self) -> String {
        match self {
            Case::Manufactured(c) => c.name.clone(),
            Case::Decay { .. } => DECAY_CASE.into(),
        }
    }

    pub fn t_end(&self) -> f64 {
        match self {
            Case::Manufactured(c) => c.t_end,
            Case::Decay { t_end, .. } => *t_end,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Case::Manufactured(_) => None,
            Case::Decay { seed, .. } => Some(*seed),
        }
    }

    pub fn manufactured(&self) -> Option<&ManufacturedCase> {
        match self {
            Case::Manufactured(c) => Some(c),
            Case::Decay { .. } => None,
        }
    }

    pub fn problem(&self, g: &Arc<Grid>) -> CliResult<Problem> {
        Ok(match self {
            Case::Manufactured(c) => c.problem(g)?,
            Case::Decay { nu, .. } => Problem::new(g.clone(), *nu)?,
        })
    }

    pub fn initial(&self, g: &Arc<Grid>) -> Field {
        match self {
            Case::Manufactured(c) => c.exact_omega(g, 0.0),
            Case::Decay { seed, .. } => {
                let w = random_band_limited(g, DECAY_KMAX, *seed);
                let peak = w.max_abs();
                w.scale(1.0 / peak)
            }
        }
    }

    pub fn exact(&self) -> Option<Arc<dyn ExactSolution>> {
        self.manufactured().map(|c| Arc::new(c.clone()) as Arc<dyn ExactSolution>)
    }
}

pub fn validate_positive(what: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{what} must be positive, got {v}")))
    }
}
