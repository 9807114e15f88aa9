//! JSON run configuration. Each subcommand reads its own top-level object;
//! command-line flags override the file, which overrides built-in defaults.

use std::path::Path;

use clap::ValueEnum;
use kirchhoff::paraxial::{GridSpec, LGModeSpec};
use kirchhoff::{BackgroundFlow, Complex64, Error, Family, IntegrationControls, PolynomialSpec, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub zeros: Option<ZerosConfig>,
    pub equilibrium: Option<EquilibriumConfig>,
    pub simulate: Option<SimulateConfig>,
    pub laughlin: Option<LaughlinConfig>,
    pub beam: Option<BeamConfig>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| Error::InvalidParameter(format!("config {}: {e}", p.display())))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolyFamily {
    Hermite,
    Laguerre,
    Jacobi,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZerosConfig {
    pub family: PolyFamily,
    pub n: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

impl ZerosConfig {
    pub fn spec(&self) -> Result<PolynomialSpec> {
        let family = match self.family {
            PolyFamily::Hermite => Family::Hermite,
            PolyFamily::Laguerre => Family::Laguerre { alpha: self.alpha },
            PolyFamily::Jacobi => Family::Jacobi { alpha: self.alpha, beta: self.beta },
        };
        PolynomialSpec::new(family, self.n)
    }
}

fn default_max_iter() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumConfig {
    pub n: usize,
    pub background: BackgroundFlow,
    #[serde(default)]
    pub initial_guess: Option<Vec<f64>>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// `[x, y]` pairs.
    pub positions: Vec<Complex64>,
    pub strengths: Vec<f64>,
    #[serde(default = "no_background")]
    pub background: BackgroundFlow,
    pub t_end: f64,
    /// Interior output times; the start and end states are always recorded.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub controls: IntegrationControls,
    /// Largest tolerated drift of each invariant; defaults to the global
    /// tolerance when there is no background and to no check otherwise.
    #[serde(default)]
    pub drift_bound: Option<f64>,
}

fn no_background() -> BackgroundFlow {
    BackgroundFlow::None
}

fn default_samples() -> usize {
    100
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaughlinConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub m_exp: u32,
    #[serde(rename = "l_B")]
    pub l_b: f64,
    #[serde(default)]
    pub initial_guess: Option<Vec<Complex64>>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub grid: GridSpec,
    pub mode: LGModeSpec,
    /// Propagation distance in units of the Rayleigh range.
    pub z_end_rayleigh: f64,
    #[serde(default = "default_slices")]
    pub slices: usize,
}

fn default_slices() -> usize {
    10
}
