use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unusable grid: n_points = {n_points} (need >= 16), x_max = {x_max} (need > 0)")]
    InvalidGrid { n_points: usize, x_max: f64 },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("expected {expected} density values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("density value at node {index} is {value}; values must be finite and >= 0")]
    InvalidDensityValue { index: usize, value: f64 },

    #[error("degenerate density: norm is zero")]
    DegenerateDensity,

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain too small at step {step}: estimated mass beyond x_max is {mass_defect:e}")]
    DomainTooSmall { step: usize, mass_defect: f64 },

    #[error("no closed-form first iteration for the {0} family (it is its own image)")]
    NoClosedForm(&'static str),

    #[error("need at least 2 agents, got {0}")]
    TooFewAgents(usize),

    #[error("degenerate ensemble: total money is zero")]
    DegenerateEnsemble,

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
