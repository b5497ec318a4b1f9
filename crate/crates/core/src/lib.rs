//! Pseudo-spectral vorticity solver with implicit-explicit Runge-Kutta time stepping.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod error;
pub mod manufactured;
pub mod orderconds;
pub mod solver;
pub mod spectral;
pub mod tableaux;

pub use error::{Error, Result};
pub use spectral::{ConvectionForm, Field, Grid, GridSpec, VectorField};
pub use orderconds::{certify, check_order, ConditionKind, ConditionResult};
pub use tableaux::{by_name, DifferenceMatrices, Family, StabilityReport, Tableau};
pub use adaptive::{ControllerConfig, Decision, StepController, Strategy};
pub use manufactured::{case_by_name, ManufacturedCase, PulseSchedule};
pub use solver::{
    ierk_step, ExactSolution, Forcing, ForcingPlacement, Integrator, Observer, Problem, SolverState,
    StepRecord, Trajectory,
};
