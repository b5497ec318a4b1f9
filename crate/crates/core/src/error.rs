use thiserror::Error;

/// Errors raised by the spectral toolkit, tableau constructors and the time integrator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("right-hand side has nonzero mean: |w(0,0)| = {mean:e} exceeds {limit:e}")]
    NonZeroMean { mean: f64, limit: f64 },

    #[error("degenerate tableau parameter {name} = {value}")]
    DegenerateParameter { name: &'static str, value: f64 },

    #[error("unknown tableau `{0}`")]
    UnknownTableau(String),

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("order must lie in 1..=4, got {0}")]
    InvalidOrder(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state at step {step}, stage {stage}")]
    NonFiniteState { step: usize, stage: usize },

    #[error("singular stage {stage}: |1 - nu tau a_ii lambda| = {denominator:e}")]
    SingularStage { stage: usize, denominator: f64 },

    #[error("step size stalled at t = {t} (tau = {tau:e}, {rejections} consecutive rejections)")]
    Stall { t: f64, tau: f64, rejections: usize },
}

impl Error {
    /// True for failures of the numerics (blow-up, singular solves, stalls) as opposed
    /// to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState { .. } | Error::SingularStage { .. } | Error::Stall { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
