//! Python bindings for the `kirchhoff` crate.
//!
//! Positions cross the boundary as Python `complex`, fields as flat
//! row-major lists with `x` fastest.

use kirchhoff::landau::{self, LaughlinParams};
use kirchhoff::paraxial::{self, ChargeLoop, GridSpec, LGModeSpec};
use kirchhoff::stieltjes::{self, EquilibriumProblem};
use kirchhoff::vortex::{self, IntegrationControls};
use kirchhoff::{orthopoly, BackgroundFlow, Complex64, Error, Family, PolynomialSpec};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pykirchhoff, KirchhoffError, PyException);
create_exception!(pykirchhoff, CollisionError, KirchhoffError);
create_exception!(pykirchhoff, ConvergenceError, KirchhoffError);

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err {
        Error::Collision { .. } | Error::StepUnderflow { .. } => CollisionError::new_err(msg),
        Error::NonConvergence(_)
        | Error::PlanarNonConvergence { .. }
        | Error::EigenNonConvergence(_)
        | Error::StepLimit { .. } => ConvergenceError::new_err(msg),
        Error::InvalidParameter(_) | Error::NonFinite(_) | Error::Domain { .. } => PyValueError::new_err(msg),
        _ => KirchhoffError::new_err(msg),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for kirchhoff::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn polynomial(family: &str, n: usize, alpha: f64, beta: f64) -> PyResult<PolynomialSpec> {
    let family = match family {
        "hermite" => Family::Hermite,
        "laguerre" => Family::Laguerre { alpha },
        "jacobi" => Family::Jacobi { alpha, beta },
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    PolynomialSpec::new(family, n).py()
}

/// Zeros of the degree-`n` polynomial of `family`, ascending.
#[pyfunction]
#[pyo3(signature = (family, n, alpha = 0.0, beta = 0.0))]
fn zeros(family: &str, n: usize, alpha: f64, beta: f64) -> PyResult<Vec<f64>> {
    orthopoly::zeros(&polynomial(family, n, alpha, beta)?).py()
}

/// Residual of the defining second-order ODE at `x`.
#[pyfunction]
#[pyo3(signature = (family, n, x, alpha = 0.0, beta = 0.0))]
fn ode_residual(family: &str, n: usize, x: f64, alpha: f64, beta: f64) -> PyResult<f64> {
    orthopoly::ode_residual(&polynomial(family, n, alpha, beta)?, x).py()
}

/// Background flow `W`.
#[pyclass(frozen, module = "pykirchhoff")]
struct Background(BackgroundFlow);

#[pymethods]
impl Background {
    #[staticmethod]
    fn none() -> Self {
        Self(BackgroundFlow::None)
    }

    #[staticmethod]
    fn hermite() -> Self {
        Self(BackgroundFlow::HermiteLinear)
    }

    #[staticmethod]
    fn coulomb(l: f64) -> Self {
        Self(BackgroundFlow::Coulomb { l })
    }

    #[staticmethod]
    fn jacobi(p: f64, q: f64) -> Self {
        Self(BackgroundFlow::Jacobi { p, q })
    }

    #[staticmethod]
    fn conjugate_linear(omega: f64) -> Self {
        Self(BackgroundFlow::ConjugateLinear { omega })
    }

    #[staticmethod]
    #[pyo3(signature = (poles, residues, polynomial = Vec::new()))]
    fn custom(poles: Vec<Complex64>, residues: Vec<Complex64>, polynomial: Vec<Complex64>) -> PyResult<Self> {
        let bg = BackgroundFlow::CustomRational { poles, residues, polynomial };
        bg.validate().py()?;
        Ok(Self(bg))
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Converged (or best) Stieltjes equilibrium.
#[pyclass(frozen, module = "pykirchhoff")]
struct EquilibriumReport(stieltjes::EquilibriumReport);

#[pymethods]
impl EquilibriumReport {
    #[getter]
    fn positions(&self) -> Vec<f64> {
        self.0.positions.clone()
    }

    #[getter]
    fn residual_inf(&self) -> f64 {
        self.0.residual_inf
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn certified(&self) -> Option<bool> {
        self.0.certified
    }

    #[getter]
    fn max_zero_deviation(&self) -> Option<f64> {
        self.0.max_zero_deviation
    }

    fn to_json(&self) -> String {
        self.0.to_record().to_json_pretty()
    }
}

/// Solves `Σ_j 1/(x_k - x_j) = W(x_k)` and certifies against the matching
/// polynomial zeros when one exists.
#[pyfunction]
#[pyo3(signature = (n, background, tol = 1e-10, max_iter = 200, initial_guess = None))]
fn solve_equilibrium(
    n: usize,
    background: &Background,
    tol: f64,
    max_iter: usize,
    initial_guess: Option<Vec<f64>>,
) -> PyResult<EquilibriumReport> {
    let mut problem = EquilibriumProblem::new(n, background.0.clone());
    if let Some(g) = initial_guess {
        problem = problem.with_guess(g);
    }
    stieltjes::solve_and_certify(&problem, tol, max_iter, tol).py().map(EquilibriumReport)
}

#[pyfunction]
fn stieltjes_residual(x: Vec<f64>, background: &Background) -> PyResult<Vec<f64>> {
    stieltjes::residual(&x, &background.0).py()
}

/// Row-major Jacobian of the Stieltjes residual.
#[pyfunction]
fn stieltjes_jacobian(x: Vec<f64>, background: &Background) -> PyResult<Vec<Vec<f64>>> {
    let j = stieltjes::jacobian(&x, &background.0).py()?;
    Ok((0..j.nrows()).map(|r| j.row(r).iter().copied().collect()).collect())
}

/// Point vortices with circulations `strengths`.
#[pyclass(frozen, module = "pykirchhoff")]
struct VortexConfiguration(vortex::VortexConfiguration);

#[pymethods]
impl VortexConfiguration {
    #[new]
    #[pyo3(signature = (positions, strengths, t = 0.0))]
    fn new(positions: Vec<Complex64>, strengths: Vec<f64>, t: f64) -> PyResult<Self> {
        vortex::VortexConfiguration::new(positions, strengths, t).py().map(Self)
    }

    #[getter]
    fn positions(&self) -> Vec<Complex64> {
        self.0.positions.clone()
    }

    #[getter]
    fn strengths(&self) -> Vec<f64> {
        self.0.strengths.clone()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    /// Velocities `dz_i/dt`.
    fn rhs(&self, background: &Background) -> PyResult<Vec<Complex64>> {
        vortex::rhs(&self.0, &background.0).py()
    }

    fn hamiltonian_rhs(&self, background: &Background) -> PyResult<Vec<Complex64>> {
        vortex::hamiltonian_rhs(&self.0, &background.0).py()
    }

    /// `(impulse, angular_impulse, energy)` of the free system.
    fn conserved(&self) -> (Complex64, f64, f64) {
        let c = vortex::conserved(&self.0);
        (c.impulse, c.angular_impulse, c.energy)
    }

    #[pyo3(signature = (background, t_end, samples = 100, rtol = 1e-10, atol = 1e-12))]
    fn integrate(
        &self,
        background: &Background,
        t_end: f64,
        samples: usize,
        rtol: f64,
        atol: f64,
    ) -> PyResult<Trajectory> {
        let controls =
            IntegrationControls { rtol, atol, ..Default::default() }.with_uniform_samples(self.0.t, t_end, samples);
        vortex::integrate(&self.0, &background.0, t_end, &controls).py().map(Trajectory)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(frozen, module = "pykirchhoff")]
struct Trajectory(vortex::Trajectory);

#[pymethods]
impl Trajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.samples.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<Complex64>> {
        self.0.samples.iter().map(|s| s.positions.clone()).collect()
    }

    /// Largest deviation of `(impulse, angular_impulse, energy)`.
    #[getter]
    fn drift(&self) -> (f64, f64, f64) {
        let d = &self.0.drift;
        (d.impulse, d.angular_impulse, d.energy)
    }

    #[getter]
    fn accepted_steps(&self) -> usize {
        self.0.accepted_steps
    }
}

/// `S_j` for the Laughlin state; zero at planar equilibria.
#[pyfunction]
fn laughlin_residual(z: Vec<Complex64>, m_exp: u32, l_b: f64) -> PyResult<Vec<Complex64>> {
    let p = LaughlinParams::new(z.len(), m_exp, l_b).py()?;
    landau::laughlin_stationarity_residual(&z, &p).py()
}

#[pyfunction]
fn log_laughlin(z: Vec<Complex64>, m_exp: u32, l_b: f64) -> PyResult<Complex64> {
    let p = LaughlinParams::new(z.len(), m_exp, l_b).py()?;
    landau::log_laughlin(&z, &p).py()
}

/// Returns `(positions, residual_inf, iterations)`.
#[pyfunction]
#[pyo3(signature = (guess, m_exp, l_b, tol = 1e-10, max_iter = 200))]
fn solve_laughlin(
    guess: Vec<Complex64>,
    m_exp: u32,
    l_b: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<(Vec<Complex64>, f64, usize)> {
    let p = LaughlinParams::new(guess.len(), m_exp, l_b).py()?;
    let eq = landau::solve_planar_equilibrium(&p, &guess, tol, max_iter).py()?;
    Ok((eq.positions, eq.residual_inf, eq.iterations))
}

/// Complex scalar field on a uniform transverse grid.
#[pyclass(frozen, module = "pykirchhoff")]
struct BeamField(paraxial::BeamField);

#[pymethods]
impl BeamField {
    #[new]
    fn new(nx: usize, ny: usize, dx: f64, dy: f64, k: f64, z: f64, amplitude: Vec<Complex64>) -> PyResult<Self> {
        paraxial::BeamField::new(nx, ny, dx, dy, k, z, amplitude).py().map(Self)
    }

    /// Normalized `LG_{p,ℓ}` at its waist on an `n × n` grid.
    #[staticmethod]
    #[pyo3(signature = (ell, w0, n, dx, k, p = 0))]
    fn lg_mode(ell: i32, w0: f64, n: usize, dx: f64, k: f64, p: u32) -> PyResult<Self> {
        paraxial::lg_mode(&LGModeSpec { p, ell, w0 }, &GridSpec::square(n, dx, k)).py().map(Self)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.nx, self.0.ny)
    }

    #[getter]
    fn z(&self) -> f64 {
        self.0.z
    }

    #[getter]
    fn amplitude(&self) -> Vec<Complex64> {
        self.0.amplitude.clone()
    }

    fn energy(&self) -> f64 {
        self.0.energy()
    }

    #[pyo3(signature = (dz, steps = 1))]
    fn propagate(&self, dz: f64, steps: usize) -> PyResult<Self> {
        paraxial::propagate(&self.0, dz, steps).py().map(Self)
    }

    /// `(w_x, w_y)` as twice the intensity standard deviation.
    fn beam_width(&self) -> (f64, f64) {
        paraxial::beam_width(&self.0)
    }

    /// Winding of the phase around a circle of `radius` grid cells about the centre.
    fn topological_charge(&self, radius: f64) -> PyResult<i64> {
        paraxial::topological_charge(&self.0, &ChargeLoop::centered(&self.0, radius)).py()
    }

    /// `[(x, y, charge)]` for every detected phase singularity.
    fn find_vortices(&self) -> Vec<(f64, f64, i64)> {
        paraxial::find_vortices(&self.0).into_iter().map(|v| (v.x, v.y, v.charge)).collect()
    }

    fn aliasing_fraction(&self) -> PyResult<f64> {
        paraxial::aliasing_fraction(&self.0).py()
    }

    fn to_bytes(&self) -> Vec<u8> {
        paraxial::io::field_to_bytes(&self.0)
    }

    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<Self> {
        paraxial::io::read_field(data.as_slice()).py().map(Self)
    }
}

#[pymodule]
fn pykirchhoff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("KirchhoffError", m.py().get_type::<KirchhoffError>())?;
    m.add("CollisionError", m.py().get_type::<CollisionError>())?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_class::<Background>()?;
    m.add_class::<EquilibriumReport>()?;
    m.add_class::<VortexConfiguration>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<BeamField>()?;
    m.add_function(wrap_pyfunction!(zeros, m)?)?;
    m.add_function(wrap_pyfunction!(ode_residual, m)?)?;
    m.add_function(wrap_pyfunction!(solve_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(stieltjes_residual, m)?)?;
    m.add_function(wrap_pyfunction!(stieltjes_jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(laughlin_residual, m)?)?;
    m.add_function(wrap_pyfunction!(log_laughlin, m)?)?;
    m.add_function(wrap_pyfunction!(solve_laughlin, m)?)?;
    Ok(())
}
