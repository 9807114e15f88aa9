use thiserror::Error;

use crate::stieltjes::EquilibriumReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// Two vortices (or a vortex and a fixed background pole) came closer
    /// than the collision threshold. The point-vortex model breaks down here.
    #[error("collision between {first} and {second} at distance {distance:e}")]
    Collision { first: String, second: String, distance: f64 },

    #[error("integration exhausted {max_steps} steps at t = {t}")]
    StepLimit { max_steps: usize, t: f64 },

    #[error("step size underflow at t = {t} (min separation {min_separation:e})")]
    StepUnderflow { t: f64, min_separation: f64 },

    #[error("point {index} at {value} lies outside the domain {domain}")]
    Domain { index: usize, value: f64, domain: &'static str },

    #[error("tridiagonal eigensolve did not converge within {0} iterations")]
    EigenNonConvergence(usize),

    #[error("equilibrium solve did not converge (residual {:e})", .0.residual_inf)]
    NonConvergence(Box<EquilibriumReport>),

    #[error("planar equilibrium did not converge (residual {residual:e} after {iterations} iterations)")]
    PlanarNonConvergence { positions: Vec<num_complex::Complex64>, residual: f64, iterations: usize },

    #[error("background flow {0} has no real potential in this formulation")]
    UnsupportedBackground(&'static str),

    #[error("polynomial family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("grid does not resolve the mode: {0}")]
    Resolution(String),

    #[error("amplitude on the loop dropped to {ratio:e} of the peak")]
    AmplitudeTooSmall { ratio: f64 },

    #[error("field format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
