//! Exact-solution benchmark cases and error metrics.
//!
//! `example1` is a forced Taylor-Green pair. The pulse cases have
//! `w = f(t) sin(l_x x)` driven by `g = g2(t) sin(l_x x)`, where `g2` switches on
//! `sin^2` bursts inside the active windows of a [`PulseSchedule`]; `f` solves
//! `f' = -nu l_x^2 f + g2` and is started on its periodic orbit.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{ExactSolution, Forcing, Problem};
use crate::spectral::{Field, Grid};

/// Magnitudes at or below this switch the mixed error to absolute.
pub const MIXED_ERROR_THRESHOLD: f64 = 1e-8;

/// `int_0^dt e^{a s} sin^2(w s) ds` in closed form.
pub fn j2(a: f64, w: f64, dt: f64) -> f64 {
    let first = if a == 0.0 { 0.5 * dt } else { (a * dt).exp_m1() / (2.0 * a) };
    let (s2, c2) = (2.0 * w * dt).sin_cos();
    first - 0.5 * ((a * dt).exp() * (a * c2 + 2.0 * w * s2) - a) / (a * a + 4.0 * w * w)
}

/// `e^{-a dt} j2(a, w, dt)`, evaluated without forming `e^{a dt}`.
pub fn j2_decayed(a: f64, w: f64, dt: f64) -> f64 {
    let decay = (-a * dt).exp();
    let first = if a == 0.0 { 0.5 * dt } else { -(-a * dt).exp_m1() / (2.0 * a) };
    let (s2, c2) = (2.0 * w * dt).sin_cos();
    first - 0.5 * ((a * c2 + 2.0 * w * s2) - a * decay) / (a * a + 4.0 * w * w)
}

/// Alternating quiescent and active windows `T_0 = 0 < T_1 < ... < T_2J`.
/// Pulse `j` occupies `(T_{2j-1}, T_{2j}]` with `l_t[j]` oscillations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub breakpoints: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl PulseSchedule {
    pub fn new(breakpoints: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        let s = Self {
            breakpoints,
            frequencies,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.frequencies.len();
        if j == 0 || self.breakpoints.len() != 2 * j + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} breakpoints do not match {} pulses",
                self.breakpoints.len(),
                j
            )));
        }
        if self.breakpoints[0] != 0.0 {
            return Err(Error::InvalidConfig("first breakpoint must be 0".into()));
        }
        if self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("breakpoints must increase strictly".into()));
        }
        if self.frequencies.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidConfig("pulse frequencies must be positive".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        *self.breakpoints.last().expect("validated")
    }

    pub fn pulses(&self) -> usize {
        self.frequencies.len()
    }

    /// `(start, length, angular frequency)` of pulse `j`.
    pub fn pulse(&self, j: usize) -> (f64, f64, f64) {
        let (t0, t1) = (self.breakpoints[2 * j + 1], self.breakpoints[2 * j + 2]);
        (t0, t1 - t0, 2.0 * PI * self.frequencies[j] / (t1 - t0))
    }

    fn wrap(&self, t: f64) -> f64 {
        let p = self.period();
        let r = t.rem_euclid(p);
        // keep the closed right end of the last pulse
        if r == 0.0 && t > 0.0 {
            p
        } else {
            r
        }
    }

    /// Temporal forcing weight, extended periodically.
    pub fn g2(&self, t: f64) -> f64 {
        let r = self.wrap(t);
        (0..self.pulses())
            .map(|j| self.pulse(j))
            .find(|&(t0, len, _)| r > t0 && r <= t0 + len)
            .map_or(0.0, |(t0, _, w)| (w * (r - t0)).sin().powi(2))
    }

    /// Periodic initial amplitude for decay rate `a`.
    pub fn f0(&self, a: f64) -> f64 {
        let p = self.period();
        let num: f64 = (0..self.pulses())
            .map(|j| {
                let (t0, len, w) = self.pulse(j);
                (-a * (p - t0 - len)).exp() * j2_decayed(a, w, len)
            })
            .sum();
        if a == 0.0 {
            f64::NAN
        } else {
            -num / (-a * p).exp_m1()
        }
    }

    /// Amplitude `f(t)` for decay rate `a` on the periodic orbit.
    pub fn f(&self, a: f64, t: f64) -> f64 {
        let r = self.wrap(t);
        let mut val = (-a * r).exp() * self.f0(a);
        for j in 0..self.pulses() {
            let (t0, len, w) = self.pulse(j);
            if r <= t0 {
                break;
            }
            let active = (r - t0).min(len);
            val += (-a * (r - t0 - active)).exp() * j2_decayed(a, w, active);
        }
        val
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CaseKind {
    /// `w = cos t sin x sin y`, `psi = w / 2`.
    TaylorGreen,
    /// `w = f(t) sin(l_x x)` with `f` on its periodic orbit.
    Pulse { schedule: PulseSchedule, lx: u32 },
}

/// A benchmark problem with known vorticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub name: String,
    pub nu: f64,
    pub t_end: f64,
    pub kind: CaseKind,
}

impl fmt::Display for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: [&str; 4] = ["example1", "example2", "example3-freqA", "example3-freqB"];

/// Looks up a case with its default parameters.
pub fn case_by_name(name: &str) -> Result<ManufacturedCase> {
    match name.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "example1" => Ok(example1()),
        "example2" => example2(1, 1.0, 20.0, 40.0, 0.5),
        "example3-freqa" => Ok(example3(freq_a(), 0.5)?.named("example3-freqA")),
        "example3-freqb" => Ok(example3(freq_b(), 0.5)?.named("example3-freqB")),
        _ => Err(Error::UnknownCase(name.to_string())),
    }
}

/// Forced Taylor-Green pair, `nu = 0.5`, `T = 1`.
pub fn example1() -> ManufacturedCase {
    ManufacturedCase {
        name: "example1".into(),
        nu: 0.5,
        t_end: 1.0,
        kind: CaseKind::TaylorGreen,
    }
}

/// Single pulse on `(t1, t_end]` after a quiescent interval.
pub fn example2(lx: u32, lt: f64, t1: f64, t_end: f64, nu: f64) -> Result<ManufacturedCase> {
    if lx == 0 {
        return Err(Error::InvalidConfig("l_x must be positive".into()));
    }
    let schedule = PulseSchedule::new(vec![0.0, t1, t_end], vec![lt])?;
    pulse_case("example2", schedule, lx, nu)
}

/// Three-pulse schedule with breakpoints 0, 20, 40, 70, 80, 90, 120.
pub fn example3(schedule: PulseSchedule, nu: f64) -> Result<ManufacturedCase> {
    pulse_case("example3", schedule, 1, nu)
}

const EXAMPLE3_BREAKPOINTS: [f64; 7] = [0.0, 20.0, 40.0, 70.0, 80.0, 90.0, 120.0];

pub fn freq_a() -> PulseSchedule {
    PulseSchedule::new(EXAMPLE3_BREAKPOINTS.to_vec(), vec![3.0, 1.0, 5.0]).expect("static schedule")
}

pub fn freq_b() -> PulseSchedule {
    PulseSchedule::new(EXAMPLE3_BREAKPOINTS.to_vec(), vec![40.0, 20.0, 50.0]).expect("static schedule")
}

fn pulse_case(name: &str, schedule: PulseSchedule, lx: u32, nu: f64) -> Result<ManufacturedCase> {
    if !(nu > 0.0) {
        return Err(Error::InvalidConfig(format!("viscosity must be positive, got {nu}")));
    }
    Ok(ManufacturedCase {
        name: name.into(),
        nu,
        t_end: schedule.period(),
        kind: CaseKind::Pulse { schedule, lx },
    })
}

impl ManufacturedCase {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    /// Temporal amplitude of the exact vorticity.
    pub fn amplitude(&self, t: f64) -> f64 {
        match &self.kind {
            CaseKind::TaylorGreen => t.cos(),
            CaseKind::Pulse { schedule, lx } => {
                schedule.f(self.nu * f64::from(*lx * *lx), t)
            }
        }
    }

    /// `||w(t)||^2` on `(0, 2 pi)^2`.
    pub fn enstrophy(&self, t: f64) -> f64 {
        let f = self.amplitude(t);
        match self.kind {
            CaseKind::TaylorGreen => PI * PI * f * f,
            CaseKind::Pulse { .. } => 2.0 * PI * PI * f * f,
        }
    }

    /// Spatial pattern shared by vorticity and forcing.
    pub fn pattern(&self, grid: &Arc<Grid>) -> Field {
        match &self.kind {
            CaseKind::TaylorGreen => Field::from_fn(grid, |x, y| x.sin() * y.sin()),
            CaseKind::Pulse { lx, .. } => {
                let k = f64::from(*lx);
                Field::from_fn(grid, move |x, _| (k * x).sin())
            }
        }
    }

    /// `-lap(pattern) = rate * pattern`.
    fn pattern_eigenvalue(&self) -> f64 {
        match &self.kind {
            CaseKind::TaylorGreen => 2.0,
            CaseKind::Pulse { lx, .. } => f64::from(*lx * *lx),
        }
    }

    pub fn forcing(&self, grid: &Arc<Grid>) -> Forcing {
        let pattern = self.pattern(grid);
        match &self.kind {
            CaseKind::TaylorGreen => {
                let nu = self.nu;
                Forcing::separable(&pattern, move |t| -t.sin() + 2.0 * nu * t.cos())
            }
            CaseKind::Pulse { schedule, .. } => {
                let s = schedule.clone();
                Forcing::separable(&pattern, move |t| s.g2(t))
            }
        }
    }

    pub fn problem(&self, grid: &Arc<Grid>) -> Result<Problem> {
        Ok(Problem::new(grid.clone(), self.nu)?.with_forcing(self.forcing(grid)))
    }

    pub fn exact_omega(&self, grid: &Arc<Grid>, t: f64) -> Field {
        self.pattern(grid).scale(self.amplitude(t))
    }

    pub fn exact_psi(&self, grid: &Arc<Grid>, t: f64) -> Field {
        self.pattern(grid).scale(self.amplitude(t) / self.pattern_eigenvalue())
    }
}

impl ExactSolution for ManufacturedCase {
    fn omega(&self, grid: &Arc<Grid>, t: f64) -> Field {
        self.exact_omega(grid, t)
    }

    fn psi(&self, grid: &Arc<Grid>, t: f64) -> Field {
        self.exact_psi(grid, t)
    }
}

/// Nodewise error, relative where `|exact| > 1e-8` and absolute elsewhere.
pub fn mixed_error(numerical: &Field, exact: &Field) -> Result<Field> {
    let diff = numerical.sub(exact)?;
    let values = diff
        .physical()
        .iter()
        .zip(exact.physical())
        .map(|(d, e)| if e.abs() <= MIXED_ERROR_THRESHOLD { *d } else { d / e })
        .collect();
    Ok(Field::from_physical(numerical.grid(), values))
}

pub fn mixed_error_max(numerical: &Field, exact: &Field) -> Result<f64> {
    Ok(mixed_error(numerical, exact)?.max_abs())
}

/// Smooth mean-free random field with modes `|l|, |m| <= kmax`, amplitudes
/// uniform in `[-1, 1]`.
pub fn random_band_limited(grid: &Arc<Grid>, kmax: i64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for l in 0..=kmax {
        for m in -kmax..=kmax {
            if l == 0 && m <= 0 {
                continue;
            }
            let (p, q): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            modes.push((l as f64, m as f64, p, q));
        }
    }
    Field::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(l, m, p, q)| {
                let (s, c) = (l * x + m * y).sin_cos();
                p * c + q * s
            })
            .sum()
    })
    .project_mean_free()
}
