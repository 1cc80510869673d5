use thiserror::Error;

/// Errors raised by the profile, operator, solver and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooCoarse { got: usize, min: usize },

    #[error("profile has {got} values but the grid has {expected} nodes")]
    LengthMismatch { got: usize, expected: usize },

    #[error("profiles live on different grids")]
    GridMismatch,

    #[error("non-finite profile value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative input {value} at node {index} exceeds the clamp tolerance")]
    NegativeInput { index: usize, value: f64 },

    #[error("nonlinearity returned {value} at x = {x}; expected a finite nonnegative value")]
    NonlinearityRange { x: f64, value: f64 },

    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("operation requires the {expected} regime, problem is {actual}")]
    WrongRegime {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("rescaling is undefined in the balanced regime (alpha*beta = N^2)")]
    BalancedRegime,

    #[error("iteration did not settle in {iterations} steps (last change {last_change:e})")]
    MaxIterExceeded { iterations: usize, last_change: f64 },

    #[error("iterate collapsed to zero at step {iteration}")]
    ZeroCollapse { iteration: usize },

    #[error("profile is not in the cone (harnack ratio {harnack_ratio})")]
    NotInCone { harnack_ratio: f64 },

    #[error("sample point at radius {radius} lies outside the closed unit ball")]
    OutOfDomain { radius: f64 },

    #[error("sample point has dimension {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
