//! Stationary Kirchhoff equations on the real line (Stieltjes electrostatics).
//!
//! `n` unit charges at `x_1 < … < x_n` repel logarithmically and feel the
//! external field of a superpotential `W`. Equilibria solve
//!
//! ```text
//! R_k(x) = Σ_{j≠k} 1/(x_k - x_j) - W(x_k) = 0
//! ```
//!
//! and minimize `E(x) = -Σ_{i<j} ln|x_i - x_j| + Σ_k V(x_k)` with `V' = W`, so
//! `R = -∇E` and the Jacobian of `R` is `-∇²E`. For the harmonic, Coulomb and
//! fixed-charge superpotentials the equilibria are the zeros of Hermite,
//! Laguerre (`α = 2l+1`) and Jacobi (`α = 2p-1`, `β = 2q-1`) polynomials.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::background::BackgroundFlow;
use crate::error::{Error, Result};
use crate::orthopoly::{self, Family, PolynomialSpec};
use crate::report::ReportRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProblem {
    pub n: usize,
    pub background: BackgroundFlow,
    pub initial_guess: Option<Vec<f64>>,
}

impl EquilibriumProblem {
    pub fn new(n: usize, background: BackgroundFlow) -> Self {
        Self { n, background, initial_guess: None }
    }

    pub fn with_guess(mut self, guess: Vec<f64>) -> Self {
        self.initial_guess = Some(guess);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        supported(&self.background)?;
        if let Some(guess) = &self.initial_guess {
            if guess.len() != self.n {
                return Err(Error::InvalidParameter(format!(
                    "initial guess has {} entries, expected {}",
                    guess.len(),
                    self.n
                )));
            }
            let mut sorted = guess.clone();
            sorted.sort_by(f64::total_cmp);
            check_points(&sorted, &self.background)?;
        }
        Ok(())
    }

    /// Affinely mapped Chebyshev points in the family's natural domain.
    pub fn default_guess(&self) -> Vec<f64> {
        let n = self.n;
        let cheb = (1..=n).rev().map(|k| (std::f64::consts::PI * (2 * k - 1) as f64 / (2 * n) as f64).cos());
        match self.background {
            BackgroundFlow::Coulomb { .. } => cheb.map(|c| 2.0 * n as f64 * (1.0 + c)).collect(),
            BackgroundFlow::Jacobi { .. } => cheb.collect(),
            _ => {
                let scale = (2.0 * n as f64).sqrt();
                cheb.map(|c| scale * c).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    GradientFlow,
    Hybrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    pub background: BackgroundFlow,
    pub positions: Vec<f64>,
    pub residual_inf: f64,
    pub iterations: usize,
    pub method: Method,
    /// `None` when the background has no orthogonal-polynomial oracle.
    pub certified: Option<bool>,
    pub max_zero_deviation: Option<f64>,
    /// Largest relative ODE residual of the oracle polynomial at the positions.
    pub max_ode_residual: Option<f64>,
}

impl EquilibriumReport {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn to_record(&self) -> ReportRecord {
        let mut parameters = serde_json::to_value(&self.background).unwrap_or_default();
        if let Some(obj) = parameters.as_object_mut() {
            obj.remove("kind");
        }
        ReportRecord {
            family: self.background.name().to_string(),
            parameters,
            n: self.n(),
            positions: serde_json::json!(self.positions),
            residual_inf: self.residual_inf,
            iterations: self.iterations,
            method: Some(serde_json::to_value(self.method).unwrap_or_default()),
            certified: self.certified,
            max_zero_deviation: self.max_zero_deviation,
            extra: Default::default(),
        }
    }
}

fn supported(bg: &BackgroundFlow) -> Result<()> {
    bg.validate()?;
    match bg {
        BackgroundFlow::HermiteLinear | BackgroundFlow::Coulomb { .. } | BackgroundFlow::Jacobi { .. } => Ok(()),
        BackgroundFlow::CustomRational { .. } if bg.is_real_on_axis() => Ok(()),
        BackgroundFlow::CustomRational { .. } => {
            Err(Error::InvalidParameter("custom background must have real poles, residues and coefficients".into()))
        }
        other => Err(Error::InvalidParameter(format!(
            "background {} has no stationary problem on the real line",
            other.name()
        ))),
    }
}

fn domain_name(bg: &BackgroundFlow) -> &'static str {
    match bg {
        BackgroundFlow::Coulomb { .. } => "(0, inf)",
        BackgroundFlow::Jacobi { .. } => "(-1, 1)",
        BackgroundFlow::CustomRational { .. } => "real line minus poles",
        _ => "real line",
    }
}

fn in_domain(bg: &BackgroundFlow, x: f64) -> bool {
    x.is_finite()
        && match bg {
            BackgroundFlow::Coulomb { .. } => x > 0.0,
            BackgroundFlow::Jacobi { .. } => x > -1.0 && x < 1.0,
            BackgroundFlow::CustomRational { poles, .. } => poles.iter().all(|p| p.re != x),
            _ => true,
        }
}

/// Domain membership and strict ordering of sorted points.
fn check_points(x: &[f64], bg: &BackgroundFlow) -> Result<()> {
    for (i, &xi) in x.iter().enumerate() {
        if !in_domain(bg, xi) {
            return Err(Error::Domain { index: i, value: xi, domain: domain_name(bg) });
        }
    }
    for i in 1..x.len() {
        if x[i] <= x[i - 1] {
            return Err(Error::InvalidParameter(format!("points {} and {i} coincide or are unordered", i - 1)));
        }
    }
    Ok(())
}

fn check_distinct(x: &[f64], bg: &BackgroundFlow) -> Result<()> {
    for (i, &xi) in x.iter().enumerate() {
        if !in_domain(bg, xi) {
            return Err(Error::Domain { index: i, value: xi, domain: domain_name(bg) });
        }
        if x[..i].contains(&xi) {
            return Err(Error::InvalidParameter(format!("point {i} coincides with an earlier point")));
        }
    }
    Ok(())
}

/// `R_k = Σ_{j≠k} 1/(x_k - x_j) - W(x_k)`.
pub fn residual(x: &[f64], bg: &BackgroundFlow) -> Result<Vec<f64>> {
    supported(bg)?;
    check_distinct(x, bg)?;
    Ok(residual_unchecked(x, bg))
}

fn residual_unchecked(x: &[f64], bg: &BackgroundFlow) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(k, &xk)| {
            let mut s = 0.0;
            for (j, &xj) in x.iter().enumerate() {
                if j != k {
                    s += 1.0 / (xk - xj);
                }
            }
            s - bg.real_value(xk)
        })
        .collect()
}

/// Analytic `∂R_k/∂x_m`.
pub fn jacobian(x: &[f64], bg: &BackgroundFlow) -> Result<DMatrix<f64>> {
    supported(bg)?;
    check_distinct(x, bg)?;
    Ok(jacobian_unchecked(x, bg))
}

fn jacobian_unchecked(x: &[f64], bg: &BackgroundFlow) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut diag = -bg.real_derivative(x[k]);
        for m in 0..n {
            if m != k {
                let w = 1.0 / (x[k] - x[m]).powi(2);
                jac[(k, m)] = w;
                diag -= w;
            }
        }
        jac[(k, k)] = diag;
    }
    jac
}

/// Electrostatic energy `E = -Σ_{i<j} ln|x_i - x_j| + Σ_k V(x_k)`.
pub fn energy(x: &[f64], bg: &BackgroundFlow) -> Result<f64> {
    supported(bg)?;
    check_distinct(x, bg)?;
    Ok(energy_unchecked(x, bg))
}

fn energy_unchecked(x: &[f64], bg: &BackgroundFlow) -> f64 {
    let mut e = 0.0;
    for i in 0..x.len() {
        e += bg.real_antiderivative(x[i]);
        for j in i + 1..x.len() {
            e -= (x[i] - x[j]).abs().ln();
        }
    }
    e
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, r| m.max(r.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|r| r * r).sum::<f64>().sqrt()
}

/// Admissible iterate: strictly ordered, inside the domain, and (for custom
/// backgrounds) no point jumped across a pole.
fn admissible(prev: &[f64], trial: &[f64], bg: &BackgroundFlow) -> bool {
    if check_points(trial, bg).is_err() {
        return false;
    }
    if let BackgroundFlow::CustomRational { poles, .. } = bg {
        for (a, b) in prev.iter().zip(trial) {
            let (lo, hi) = if a < b { (*a, *b) } else { (*b, *a) };
            if poles.iter().any(|p| p.re > lo && p.re < hi) {
                return false;
            }
        }
    }
    true
}

const MAX_HALVINGS: usize = 30;
const GRADIENT_BURST: usize = 50;

/// Energies of a gradient-flow run, one entry per accepted step plus the start.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientFlowTrace {
    pub positions: Vec<f64>,
    pub energies: Vec<f64>,
    pub steps: usize,
}

/// Steepest descent on the electrostatic energy with Armijo backtracking.
/// Every accepted step strictly lowers `E`.
pub fn gradient_flow(x0: &[f64], bg: &BackgroundFlow, max_steps: usize, tolerance: f64) -> Result<GradientFlowTrace> {
    supported(bg)?;
    let mut x = x0.to_vec();
    x.sort_by(f64::total_cmp);
    check_points(&x, bg)?;
    let mut energies = vec![energy_unchecked(&x, bg)];
    let mut eta = 1e-2;
    let steps = descend(&mut x, bg, &mut eta, max_steps, tolerance, &mut energies);
    Ok(GradientFlowTrace { positions: x, energies, steps })
}

fn descend(
    x: &mut Vec<f64>,
    bg: &BackgroundFlow,
    eta: &mut f64,
    max_steps: usize,
    tolerance: f64,
    energies: &mut Vec<f64>,
) -> usize {
    let mut e = energy_unchecked(x, bg);
    let mut taken = 0;
    for _ in 0..max_steps {
        let r = residual_unchecked(x, bg);
        if inf_norm(&r) <= tolerance {
            break;
        }
        let slope: f64 = r.iter().map(|v| v * v).sum();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&r).map(|(xi, ri)| xi + *eta * ri).collect();
            if admissible(x, &trial, bg) {
                let et = energy_unchecked(&trial, bg);
                if et < e - 1e-4 * *eta * slope {
                    *x = trial;
                    e = et;
                    energies.push(e);
                    accepted = true;
                    *eta *= 1.5;
                    break;
                }
            }
            *eta *= 0.5;
        }
        if !accepted {
            break;
        }
        taken += 1;
    }
    taken
}

/// Damped Newton on `R` with the analytic Jacobian; falls back to gradient
/// flow on `E` whenever 30 step halvings fail to produce an admissible
/// iterate with a smaller residual.
pub fn solve(problem: &EquilibriumProblem, tolerance: f64, max_iter: usize) -> Result<EquilibriumReport> {
    problem.validate()?;
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} must be positive")));
    }
    let bg = &problem.background;
    let mut x = problem.initial_guess.clone().unwrap_or_else(|| problem.default_guess());
    x.sort_by(f64::total_cmp);
    check_points(&x, bg)?;

    let mut r = residual_unchecked(&x, bg);
    let mut best = (x.clone(), inf_norm(&r));
    let mut used_newton = false;
    let mut used_gradient = false;
    let mut eta = 1e-2;
    let mut iterations = 0;
    let mut scratch_energies = Vec::new();

    while iterations < max_iter && inf_norm(&r) > tolerance {
        iterations += 1;
        let jac = jacobian_unchecked(&x, bg);
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs);
        let mut moved = false;
        if let Some(dx) = step {
            let r_norm = two_norm(&r);
            let mut s = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(xi, di)| xi + s * di).collect();
                if admissible(&x, &trial, bg) {
                    let rt = residual_unchecked(&trial, bg);
                    if two_norm(&rt) <= (1.0 - 1e-4 * s) * r_norm {
                        x = trial;
                        r = rt;
                        moved = true;
                        used_newton = true;
                        break;
                    }
                }
                s *= 0.5;
            }
        }
        if !moved {
            scratch_energies.clear();
            let taken = descend(&mut x, bg, &mut eta, GRADIENT_BURST, tolerance, &mut scratch_energies);
            if taken == 0 {
                break;
            }
            used_gradient = true;
            iterations += taken - 1;
            r = residual_unchecked(&x, bg);
        }
        let rn = inf_norm(&r);
        if rn < best.1 {
            best = (x.clone(), rn);
        }
    }

    if best.1 <= tolerance {
        polish(&mut best, bg);
    }

    let method = match (used_newton, used_gradient) {
        (_, false) => Method::Newton,
        (false, true) => Method::GradientFlow,
        (true, true) => Method::Hybrid,
    };
    let converged = best.1 <= tolerance;
    let report = EquilibriumReport {
        background: bg.clone(),
        positions: best.0,
        residual_inf: best.1,
        iterations,
        method,
        certified: if converged { None } else { Some(false) },
        max_zero_deviation: None,
        max_ode_residual: None,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::NonConvergence(Box::new(report)))
    }
}

fn same_family(a: &PolynomialSpec, b: &PolynomialSpec) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
    a.degree == b.degree
        && match (a.family, b.family) {
            (Family::Hermite, Family::Hermite) => true,
            (Family::Laguerre { alpha: x }, Family::Laguerre { alpha: y }) => close(x, y),
            (Family::Jacobi { alpha: x, beta: u }, Family::Jacobi { alpha: y, beta: v }) => close(x, y) && close(u, v),
            _ => false,
        }
}

/// Full Newton steps past the tolerance, kept only while the residual drops.
fn polish(best: &mut (Vec<f64>, f64), bg: &BackgroundFlow) {
    for _ in 0..3 {
        let r = residual_unchecked(&best.0, bg);
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let Some(dx) = jacobian_unchecked(&best.0, bg).lu().solve(&rhs) else {
            return;
        };
        let trial: Vec<f64> = best.0.iter().zip(dx.iter()).map(|(x, d)| x + d).collect();
        if !admissible(&best.0, &trial, bg) {
            return;
        }
        let rn = inf_norm(&residual_unchecked(&trial, bg));
        if rn >= best.1 {
            return;
        }
        *best = (trial, rn);
    }
}

/// Compares the equilibrium against the zeros of `spec`, which must be the
/// polynomial associated with the report's background.
pub fn certify(report: &EquilibriumReport, spec: &PolynomialSpec, tol: f64) -> Result<EquilibriumReport> {
    let expected = report.background.polynomial_spec(report.n()).ok_or_else(|| {
        Error::FamilyMismatch(format!("background {} has no polynomial oracle", report.background.name()))
    })??;
    if !same_family(&expected, spec) {
        return Err(Error::FamilyMismatch(format!("report background corresponds to {expected:?}, got {spec:?}")));
    }
    let zeros = orthopoly::zeros(spec)?;
    let mut positions = report.positions.clone();
    positions.sort_by(f64::total_cmp);
    let deviation = positions.iter().zip(&zeros).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let mut ode = 0.0f64;
    for &x in &positions {
        let res = orthopoly::ode_residual(spec, x)?;
        let scale = orthopoly::ode_scale(spec, x)?;
        if scale > 0.0 {
            ode = ode.max(res.abs() / scale);
        }
    }
    let mut out = report.clone();
    out.positions = positions;
    out.max_zero_deviation = Some(deviation);
    out.max_ode_residual = Some(ode);
    out.certified = Some(deviation <= tol && report.residual_inf.is_finite());
    Ok(out)
}

/// Solve and, when the background has a polynomial oracle, certify.
pub fn solve_and_certify(
    problem: &EquilibriumProblem,
    tolerance: f64,
    max_iter: usize,
    certify_tol: f64,
) -> Result<EquilibriumReport> {
    let report = solve(problem, tolerance, max_iter)?;
    match problem.background.polynomial_spec(problem.n) {
        Some(spec) => certify(&report, &spec?, certify_tol),
        None => Ok(report),
    }
}

/// Supersymmetric partner potentials `V± = W² ∓ W' + E`.
pub fn partner_potentials<W, D>(w: W, w_prime: D, energy: f64, x: f64) -> (f64, f64)
where
    W: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (wx, dw) = (w(x), w_prime(x));
    (wx * wx - dw + energy, wx * wx + dw + energy)
}

/// [`partner_potentials`] for one of the built-in superpotentials.
pub fn background_partner_potentials(bg: &BackgroundFlow, energy: f64, x: f64) -> (f64, f64) {
    partner_potentials(|t| bg.real_value(t), |t| bg.real_derivative(t), energy, x)
}
