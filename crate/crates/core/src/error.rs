use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis index {index} out of range for order {order}")]
    BasisIndex { index: usize, order: usize },

    #[error("adaptive quadrature did not converge (achieved error estimate {achieved:e}, requested {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("non-positive water height h = {h:e}")]
    DryState { h: f64 },

    #[error("state has {got} conserved components, model expects {expected}")]
    Dimension { expected: usize, got: usize },

    #[error("model {kind} requires N = {required}, got N = {got}")]
    ModelOrder {
        kind: &'static str,
        required: usize,
        got: usize,
    },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("no steady state with positive height: f(h_c) = {f_min:e} > 0")]
    NoSteadyState { f_min: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("degenerate wave speeds at interface: S_l = S_r = {speed}")]
    DegenerateWaves { speed: f64 },

    #[error("non-positive water height {h:e} at x = {x} (t = {t})")]
    NegativeDepth { h: f64, x: f64, t: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
