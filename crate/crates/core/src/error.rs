use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The CLI maps [`Error::Config`] to exit code 2 and every numerical variant
/// to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("resolution error: {interface_nodes} interface nodes, at least {required} needed")]
    Resolution { interface_nodes: usize, required: usize },

    #[error("solvability violation in {context}: defect {defect:.3e} exceeds {tolerance:.1e}")]
    Solvability {
        context: String,
        defect: f64,
        tolerance: f64,
    },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("eigensolver did not converge after {iterations} iterations (residuals {residuals:?})")]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("resonance: zeta {zeta} lies within {distance:.3e} of eigenvalue {eigenvalue}")]
    Resonance {
        zeta: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("pole: zeta {zeta} coincides with asymptote at {pole}")]
    Pole { zeta: f64, pole: f64 },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("branch inversion failure: {0}")]
    Inversion(String),

    #[error("hierarchy failure at stage {stage} in {equation}: defect {defect:.3e}")]
    Hierarchy {
        stage: usize,
        equation: &'static str,
        defect: f64,
    },

    #[error("tracking failure: no eigenvalue within 50% of target {target} (nearest {nearest})")]
    Tracking { target: f64, nearest: f64 },

    #[error("too few nonzero terms for a radius fit: have {have}, need {need}")]
    TooFewTerms { have: usize, need: usize },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
