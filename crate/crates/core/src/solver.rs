//! IERK time stepping of the vorticity equation
//! `d_t w + c_h(u, w) = nu lap_h w + g`, `-lap_h psi = w`, `u = (D_y psi, -D_x psi)`.
//!
//! Each stage is solved exactly mode by mode in coefficient space, because the
//! implicit operator `1 - nu tau a_ii lap_h` is diagonal there.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adaptive::{clamp_final, Decision, StepController, MAX_CONSECUTIVE_REJECTIONS};
use crate::error::{Error, Result};
use crate::manufactured::mixed_error_max;
use crate::spectral::{
    convection, solve_poisson, spectral_energy, velocity, ConvectionForm, Field, Grid, VectorField,
};
use crate::tableaux::Tableau;

/// Below this the stage denominator counts as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-14;

type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type FieldFn = Arc<dyn Fn(&Arc<Grid>, f64) -> Field + Send + Sync>;

/// Source term `g(x, y, t)`.
#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    None,
    /// `weight(t) * pattern(x, y)`; the pattern is stored mean-free.
    Separable { pattern: Field, weight: WeightFn },
    /// Arbitrary `g(t)`, evaluated on the grid and projected to mean zero.
    General(FieldFn),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => f.write_str("Forcing::None"),
            Forcing::Separable { .. } => f.write_str("Forcing::Separable"),
            Forcing::General(_) => f.write_str("Forcing::General"),
        }
    }
}

impl Forcing {
    pub fn separable(pattern: &Field, weight: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Forcing::Separable {
            pattern: pattern.project_mean_free(),
            weight: Arc::new(weight),
        }
    }

    pub fn general(g: impl Fn(&Arc<Grid>, f64) -> Field + Send + Sync + 'static) -> Self {
        Forcing::General(Arc::new(g))
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Forcing::None)
    }

    /// `g(t)` as a field (zero for [`Forcing::None`]).
    pub fn eval(&self, grid: &Arc<Grid>, t: f64) -> Field {
        match self {
            Forcing::None => Field::zeros(grid),
            Forcing::Separable { pattern, weight } => pattern.scale(weight(t)),
            Forcing::General(g) => g(grid, t).project_mean_free(),
        }
    }

    /// Adds `sum_k w_k g(t_k)` to a coefficient array.
    fn accumulate(&self, grid: &Arc<Grid>, terms: &[(f64, f64)], acc: &mut [Complex64]) {
        match self {
            Forcing::None => {}
            Forcing::Separable { pattern, weight } => {
                let total: f64 = terms.iter().map(|&(w, t)| w * weight(t)).sum();
                if total != 0.0 {
                    for (a, p) in acc.iter_mut().zip(pattern.spectral()) {
                        *a += p * total;
                    }
                }
            }
            Forcing::General(_) => {
                for &(w, t) in terms.iter().filter(|(w, _)| *w != 0.0) {
                    let g = self.eval(grid, t);
                    for (a, p) in acc.iter_mut().zip(g.spectral()) {
                        *a += p * w;
                    }
                }
            }
        }
    }
}

/// Which stage weights multiply the forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingPlacement {
    /// `tau sum_{j<=i} â_{i+1,j} g(t_{n,j})`: the source is quadratured like the
    /// convection term, which keeps the full order of the pair.
    #[default]
    Explicit,
    /// `tau sum_{j=2}^{i+1} a_{i+1,j} g(t_{n,j})`: weights of the diffusion sum.
    /// Limited to second order because `bᵀc² = 1/3` is not among the conditions.
    Implicit,
}

/// Viscosity, forcing and discretization options for one run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Arc<Grid>,
    pub nu: f64,
    pub forcing: Forcing,
    pub convection_form: ConvectionForm,
    pub forcing_placement: ForcingPlacement,
    /// Multiply `g` by `nu` inside the stage sums.
    pub forcing_scaled_by_nu: bool,
}

impl Problem {
    pub fn new(grid: Arc<Grid>, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidConfig(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self {
            grid,
            nu,
            forcing: Forcing::None,
            convection_form: ConvectionForm::Skew,
            forcing_placement: ForcingPlacement::Explicit,
            forcing_scaled_by_nu: false,
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_convection(mut self, form: ConvectionForm) -> Self {
        self.convection_form = form;
        self
    }

    pub fn with_placement(mut self, placement: ForcingPlacement) -> Self {
        self.forcing_placement = placement;
        self
    }

    pub fn with_forcing_scaled_by_nu(mut self, flag: bool) -> Self {
        self.forcing_scaled_by_nu = flag;
        self
    }
}

/// Vorticity, stream function and velocity at one time level.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub omega: Field,
    pub psi: Field,
    pub vel: VectorField,
    pub t: f64,
    /// Last accepted step (0 before the first).
    pub tau_prev: f64,
    /// `||w^n - w^{n-1}|| / tau_n`, `+inf` before the first step.
    pub dtau_norm: f64,
    pub step_index: usize,
}

impl SolverState {
    /// Builds the consistent triple from `omega0`. Fails if `omega0` has a mean.
    pub fn new(omega0: Field, t0: f64) -> Result<Self> {
        let psi = solve_poisson(&omega0)?;
        let omega = omega0.project_mean_free();
        let vel = velocity(&psi);
        Ok(Self {
            omega,
            psi,
            vel,
            t: t0,
            tau_prev: 0.0,
            dtau_norm: f64::INFINITY,
            step_index: 0,
        })
    }

    pub fn enstrophy(&self) -> f64 {
        spectral_energy(&self.omega)
    }
}

/// Advances `state` by one step of size `tau`.
pub fn ierk_step(state: &SolverState, prob: &Problem, tab: &Tableau, tau: f64) -> Result<SolverState> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {tau}")));
    }
    let grid = &prob.grid;
    if state.omega.grid().spec() != grid.spec() {
        return Err(Error::GridMismatch);
    }
    let (a, a_hat, c) = (tab.a(), tab.a_hat(), tab.c());
    let s = tab.stages();
    let n = grid.len();
    let nu = prob.nu;
    let step = state.step_index + 1;
    let g_scale = if prob.forcing_scaled_by_nu { nu } else { 1.0 };
    let lam: Vec<f64> = (0..n).map(|k| grid.laplacian_symbol(k)).collect();

    let w0 = state.omega.spectral().to_vec();
    let mut stages_hat: Vec<Vec<Complex64>> = Vec::with_capacity(s);
    let mut conv_hat: Vec<Vec<Complex64>> = Vec::with_capacity(s);
    stages_hat.push(w0.clone());
    let (mut omega, mut psi, mut vel) = (state.omega.clone(), state.psi.clone(), state.vel.clone());
    let mut terms = Vec::with_capacity(s);

    for i in 1..s {
        let conv = convection(&vel, &omega, prob.convection_form)?;
        conv_hat.push(conv.spectral().to_vec());

        let mut rhs = w0.clone();
        for j in 0..i {
            let ah = a_hat[(i, j)];
            if ah != 0.0 {
                for (r, cj) in rhs.iter_mut().zip(&conv_hat[j]) {
                    *r -= cj * (tau * ah);
                }
            }
        }
        for j in 1..i {
            let aij = a[(i, j)];
            if aij != 0.0 {
                let wj = &stages_hat[j];
                for k in 0..n {
                    rhs[k] += wj[k] * (tau * aij * nu * lam[k]);
                }
            }
        }
        terms.clear();
        match prob.forcing_placement {
            ForcingPlacement::Explicit => {
                terms.extend((0..i).map(|j| (tau * g_scale * a_hat[(i, j)], state.t + c[j] * tau)))
            }
            ForcingPlacement::Implicit => {
                terms.extend((1..=i).map(|j| (tau * g_scale * a[(i, j)], state.t + c[j] * tau)))
            }
        }
        prob.forcing.accumulate(grid, &terms, &mut rhs);

        let aii = a[(i, i)];
        let mut smallest = f64::INFINITY;
        for k in 0..n {
            let denom = 1.0 - nu * tau * aii * lam[k];
            smallest = smallest.min(denom.abs());
            rhs[k] /= denom;
        }
        if smallest < SINGULAR_TOLERANCE {
            return Err(Error::SingularStage {
                stage: i + 1,
                denominator: smallest,
            });
        }

        omega = Field::from_spectral(grid, rhs.clone());
        if !omega.is_finite() {
            return Err(Error::NonFiniteState { step, stage: i + 1 });
        }
        psi = solve_poisson(&omega)?;
        vel = velocity(&psi);
        stages_hat.push(rhs);
    }

    let omega = omega.project_mean_free();
    let diff: Vec<Complex64> = omega.spectral().iter().zip(&w0).map(|(x, y)| x - y).collect();
    let dtau_norm = spectral_energy(&Field::from_spectral(grid, diff)).sqrt() / tau;
    Ok(SolverState {
        omega,
        psi,
        vel,
        t: state.t + tau,
        tau_prev: tau,
        dtau_norm,
        step_index: step,
    })
}

/// Analytic vorticity and stream function used for error monitoring.
pub trait ExactSolution: Send + Sync {
    fn omega(&self, grid: &Arc<Grid>, t: f64) -> Field;
    fn psi(&self, grid: &Arc<Grid>, t: f64) -> Field;
}

/// One attempted step. Rejected attempts carry the would-be state's values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub tau: f64,
    pub enstrophy: f64,
    pub dtau_norm: f64,
    pub err_mix_inf: Option<f64>,
    pub rejected: bool,
}

/// Callback receiving every step record together with the state it describes.
pub trait Observer {
    fn observe(&mut self, record: &StepRecord, state: &SolverState);
}

impl Observer for () {
    fn observe(&mut self, _: &StepRecord, _: &SolverState) {}
}

impl<F: FnMut(&StepRecord, &SolverState)> Observer for F {
    fn observe(&mut self, record: &StepRecord, state: &SolverState) {
        self(record, state)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial_enstrophy: f64,
    /// Accepted and rejected attempts in execution order.
    pub records: Vec<StepRecord>,
    pub final_state: SolverState,
}

impl Trajectory {
    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord> + '_ {
        self.records.iter().filter(|r| !r.rejected)
    }

    pub fn steps(&self) -> usize {
        self.accepted().count()
    }

    pub fn rejections(&self) -> usize {
        self.records.iter().filter(|r| r.rejected).count()
    }

    /// Largest mixed error over accepted steps, if an exact solution was attached.
    pub fn max_err_mix(&self) -> Option<f64> {
        self.accepted()
            .filter_map(|r| r.err_mix_inf)
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.max(e))))
    }
}

/// A problem and tableau bundled with an optional exact solution.
#[derive(Clone)]
pub struct Integrator {
    pub problem: Problem,
    pub tableau: Tableau,
    exact: Option<Arc<dyn ExactSolution>>,
}

impl fmt::Debug for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrator")
            .field("problem", &self.problem)
            .field("tableau", &self.tableau.label())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl Integrator {
    /// Fails if the tableau violates its structural invariants.
    pub fn new(problem: Problem, tableau: Tableau) -> Result<Self> {
        let violations = tableau.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidTableau(violations.join("; ")));
        }
        Ok(Self {
            problem,
            tableau,
            exact: None,
        })
    }

    pub fn with_exact(mut self, exact: Arc<dyn ExactSolution>) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn step(&self, state: &SolverState, tau: f64) -> Result<SolverState> {
        ierk_step(state, &self.problem, &self.tableau, tau)
    }

    fn record(&self, state: &SolverState, tau: f64, rejected: bool) -> Result<StepRecord> {
        let err_mix_inf = match &self.exact {
            Some(ex) => Some(mixed_error_max(&state.omega, &ex.omega(&self.problem.grid, state.t))?),
            None => None,
        };
        Ok(StepRecord {
            n: state.step_index,
            t: state.t,
            tau,
            enstrophy: state.enstrophy(),
            dtau_norm: state.dtau_norm,
            err_mix_inf,
            rejected,
        })
    }

    fn start(&self, omega0: Field, t0: f64, t_end: f64) -> Result<SolverState> {
        if !(t_end > t0) {
            return Err(Error::InvalidConfig(format!("final time {t_end} must exceed start {t0}")));
        }
        SolverState::new(omega0, t0)
    }

    /// Constant steps of size `tau`, the last one shortened to land on `t_end`.
    pub fn run_fixed(
        &self,
        omega0: Field,
        t0: f64,
        tau: f64,
        t_end: f64,
        observer: &mut dyn Observer,
    ) -> Result<Trajectory> {
        let mut state = self.start(omega0, t0, t_end)?;
        let initial_enstrophy = state.enstrophy();
        let mut records = Vec::new();
        let n_steps = ((t_end - t0) / tau * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for k in 1..=n_steps {
            let h = if k == n_steps { t_end - state.t } else { tau };
            let mut next = self.step(&state, h)?;
            if k == n_steps {
                next.t = t_end;
            }
            state = next;
            let rec = self.record(&state, h, false)?;
            observer.observe(&rec, &state);
            records.push(rec);
        }
        Ok(Trajectory {
            initial_enstrophy,
            records,
            final_state: state,
        })
    }

    /// Adaptive run driven by `controller`, starting from `tau_min`.
    pub fn run_adaptive(
        &self,
        omega0: Field,
        t0: f64,
        t_end: f64,
        controller: &mut StepController,
        observer: &mut dyn Observer,
    ) -> Result<Trajectory> {
        let mut state = self.start(omega0, t0, t_end)?;
        let initial_enstrophy = state.enstrophy();
        let mut records = Vec::new();
        let mut tau = clamp_final(controller.initial_step(), t0, t_end);
        let eps = 1e-13 * t_end.abs().max(1.0);
        while t_end - state.t > eps {
            let candidate = self.step(&state, tau)?;
            match controller.decide(tau, candidate.dtau_norm) {
                Decision::Reject { retry_tau } => {
                    let rec = self.record(&candidate, tau, true)?;
                    observer.observe(&rec, &candidate);
                    records.push(rec);
                    if controller.consecutive_rejections() >= MAX_CONSECUTIVE_REJECTIONS {
                        return Err(Error::Stall {
                            t: state.t,
                            tau: retry_tau,
                            rejections: controller.consecutive_rejections(),
                        });
                    }
                    tau = retry_tau;
                }
                Decision::Accept { tau_next } => {
                    state = candidate;
                    if (t_end - state.t).abs() <= eps {
                        state.t = t_end;
                    }
                    let rec = self.record(&state, tau, false)?;
                    observer.observe(&rec, &state);
                    records.push(rec);
                    tau = clamp_final(tau_next, state.t, t_end);
                }
            }
        }
        Ok(Trajectory {
            initial_enstrophy,
            records,
            final_state: state,
        })
    }
}
