//! Point-vortex dynamics, Stieltjes electrostatics and their quantum
//! counterparts: orthogonal polynomials, Laughlin quasiholes and paraxial
//! optical vortices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod error;
pub mod landau;
pub mod orthopoly;
pub mod paraxial;
pub mod report;
pub mod stieltjes;
pub mod vortex;

pub use background::BackgroundFlow;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use orthopoly::{Family, PolynomialSpec};
pub use report::ReportRecord;
pub use stieltjes::{EquilibriumProblem, EquilibriumReport, Method};
pub use vortex::{ConservedSet, IntegrationControls, Trajectory, VortexConfiguration};
