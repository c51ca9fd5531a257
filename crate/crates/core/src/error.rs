use thiserror::Error;

/// Errors raised by kernel, grid and solver construction or evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid kernel specification: {0}")]
    InvalidSpec(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("fragment count diverges: breakage exponent alpha = {alpha} must exceed -1")]
    DivergentFragmentCount { alpha: f64 },
    #[error("quadrature did not converge (achieved residual {residual:e})")]
    QuadratureNonConvergence { residual: f64 },
    #[error("omega bound unavailable: {0}")]
    BoundUnavailable(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("step size underflow at t = {t:e} (dt = {dt:e}); limiting cell {cell}")]
    StiffnessFailure { t: f64, dt: f64, cell: usize },
    #[error("step budget of {max_steps} exhausted at t = {t:e}")]
    MaxSteps { max_steps: usize, t: f64 },
    #[error("time mismatch: density at t = {density_t}, reference requested at t = {requested_t}")]
    TimeMismatch { density_t: f64, requested_t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
