//! Step-size controllers driven by the discrete time-derivative norm `||d_tau w||`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive rejections after which an adaptive run gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ats", alias = "ATS")]
    Ats,
    #[serde(rename = "ats-ld", alias = "ATS-LD", alias = "ats_ld")]
    AtsLd,
    #[default]
    #[serde(rename = "ats-ldlb", alias = "ATS-LDLB", alias = "ats_ldlb")]
    AtsLdlb,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Ats, Strategy::AtsLd, Strategy::AtsLdlb];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ats => "ats",
            Strategy::AtsLd => "ats-ld",
            Strategy::AtsLdlb => "ats-ldlb",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub beta: f64,
    pub r_star: f64,
    pub d_max: usize,
    pub gamma_tol: f64,
    pub beta_thr: f64,
    pub strategy: Strategy,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            tau_min: 1e-4,
            tau_max: 0.1,
            beta: 1000.0,
            r_star: 4.0,
            d_max: 5,
            gamma_tol: 1e-3,
            beta_thr: 10.0,
            strategy: Strategy::AtsLdlb,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_max && self.tau_max.is_finite()) {
            return fail(format!(
                "need 0 < tau_min <= tau_max, got tau_min = {}, tau_max = {}",
                self.tau_min, self.tau_max
            ));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.r_star > 1.0) {
            return fail(format!("r_star must exceed 1, got {}", self.r_star));
        }
        if self.d_max < 1 {
            return fail("d_max must be at least 1".into());
        }
        if !(self.gamma_tol > 0.0) {
            return fail(format!("gamma_tol must be positive, got {}", self.gamma_tol));
        }
        if !(self.beta_thr > 1.0) {
            return fail(format!("beta_thr must exceed 1, got {}", self.beta_thr));
        }
        Ok(())
    }
}

/// `min{ max{tau_min, tau_max / sqrt(1 + beta ||d_tau w||^2)}, r* tau_n }`.
pub fn ats_formula(cfg: &ControllerConfig, tau_n: f64, dtau_norm: f64) -> f64 {
    let target = cfg.tau_max / (1.0 + cfg.beta * dtau_norm * dtau_norm).sqrt();
    cfg.tau_min.max(target).min(cfg.r_star * tau_n)
}

/// Shortens the step so the run ends exactly at `t_end`.
pub fn clamp_final(tau_next: f64, t_n: f64, t_end: f64) -> f64 {
    tau_next.min(t_end - t_n)
}

/// Population variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Accept { tau_next: f64 },
    Reject { retry_tau: f64 },
}

/// Delay window and history of one adaptive run.
#[derive(Debug, Clone)]
pub struct StepController {
    cfg: ControllerConfig,
    d: usize,
    history: Vec<f64>,
    prev_norm: f64,
    consecutive_rejections: usize,
}

impl StepController {
    pub fn new(cfg: ControllerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            d: 1,
            history: vec![0.0; cfg.d_max],
            prev_norm: f64::INFINITY,
            consecutive_rejections: 0,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// Delay counter, in `1..=d_max`.
    pub fn delay(&self) -> usize {
        self.d
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Norm of the last accepted step (`+inf` before the first).
    pub fn prev_norm(&self) -> f64 {
        self.prev_norm
    }

    pub fn consecutive_rejections(&self) -> usize {
        self.consecutive_rejections
    }

    /// Step size for the first step.
    pub fn initial_step(&self) -> f64 {
        self.cfg.tau_min
    }

    fn reset_window(&mut self) {
        self.d = 1;
        self.history.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Judges a completed step of size `tau_n` whose time-derivative norm is `dtau_norm`.
    pub fn decide(&mut self, tau_n: f64, dtau_norm: f64) -> Decision {
        let cfg = self.cfg;
        let ats = ats_formula(&cfg, tau_n, dtau_norm);
        let tau_next = match cfg.strategy {
            Strategy::Ats => ats,
            Strategy::AtsLd | Strategy::AtsLdlb if dtau_norm > self.prev_norm => {
                self.reset_window();
                if cfg.strategy == Strategy::AtsLdlb
                    && dtau_norm > cfg.beta_thr * self.prev_norm
                    && tau_n > cfg.tau_min
                {
                    self.consecutive_rejections += 1;
                    return Decision::Reject {
                        retry_tau: cfg.tau_min.max(tau_n / cfg.beta_thr),
                    };
                }
                ats
            }
            Strategy::AtsLd | Strategy::AtsLdlb => {
                self.history[self.d - 1] = dtau_norm;
                if self.d < cfg.d_max {
                    self.d += 1;
                    tau_n
                } else {
                    let gamma = variance(&self.history);
                    self.reset_window();
                    if gamma < cfg.gamma_tol {
                        ats
                    } else {
                        tau_n
                    }
                }
            }
        };
        self.prev_norm = dtau_norm;
        self.consecutive_rejections = 0;
        Decision::Accept { tau_next }
    }
}
