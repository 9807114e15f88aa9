//! Classical orthogonal polynomials in monic normalization.
//!
//! Evaluation runs the three-term recurrence
//! `p_{k+1}(x) = (x - a_k) p_k(x) - b_k p_{k-1}(x)` together with its first two
//! derivatives. Zeros come from the eigenvalues of the symmetric tridiagonal
//! (Jacobi) matrix built from the same coefficients, then a Newton polish on
//! the recurrence.
//!
//! Weights: Hermite `e^{-x^2}` on the real line, generalized Laguerre
//! `x^α e^{-x}` on `(0, ∞)`, Jacobi `(1-x)^α (1+x)^β` on `(-1, 1)`.
//! Conventional normalizations differ from the monic one by the leading
//! coefficient only: `H_n = 2^n p_n`, `L_n^{(α)} = (-1)^n p_n / n!`,
//! `P_n^{(α,β)} = (2n+α+β)! / (2^n n! (n+α+β)!) p_n` (Gamma functions for
//! non-integer arguments).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Polynomial family together with its weight parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Hermite,
    Laguerre { alpha: f64 },
    Jacobi { alpha: f64, beta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hermite => "hermite",
            Family::Laguerre { .. } => "laguerre",
            Family::Jacobi { .. } => "jacobi",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    #[serde(flatten)]
    pub family: Family,
    pub degree: usize,
}

impl PolynomialSpec {
    pub fn new(family: Family, degree: usize) -> Result<Self> {
        let spec = Self { family, degree };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hermite(degree: usize) -> Result<Self> {
        Self::new(Family::Hermite, degree)
    }

    pub fn laguerre(degree: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Laguerre { alpha }, degree)
    }

    pub fn jacobi(degree: usize, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Jacobi { alpha, beta }, degree)
    }

    /// Laguerre polynomial whose zeros are the equilibria of the Coulomb
    /// superpotential with angular momentum `l` (`α = 2l + 1`).
    pub fn coulomb(degree: usize, l: f64) -> Result<Self> {
        if !(l >= 0.0) {
            return Err(Error::InvalidParameter(format!("Coulomb l = {l} must be >= 0")));
        }
        Self::laguerre(degree, 2.0 * l + 1.0)
    }

    /// Jacobi polynomial whose zeros are the equilibria between fixed charges
    /// `p` at +1 and `q` at -1 (`α = 2p - 1`, `β = 2q - 1`).
    pub fn jacobi_charges(degree: usize, p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::InvalidParameter(format!("fixed charges p = {p}, q = {q} must be positive")));
        }
        Self::jacobi(degree, 2.0 * p - 1.0, 2.0 * q - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidParameter("degree must be >= 1".into()));
        }
        match self.family {
            Family::Hermite => {}
            Family::Laguerre { alpha } => check_exponent("alpha", alpha)?,
            Family::Jacobi { alpha, beta } => {
                check_exponent("alpha", alpha)?;
                check_exponent("beta", beta)?;
            }
        }
        Ok(())
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        Self { family: self.family, degree }
    }
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {value} must be > -1")))
    }
}

/// Monic recurrence coefficients `a_0..a_{n-1}`, `b_0..b_{n-1}`.
///
/// `b[0]` holds the total mass of the weight, which the recurrence never
/// multiplies by anything non-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn recurrence(spec: &PolynomialSpec) -> Result<RecurrenceCoefficients> {
    spec.validate()?;
    let n = spec.degree;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    match spec.family {
        Family::Hermite => {
            for k in 0..n {
                a.push(0.0);
                b.push(if k == 0 { std::f64::consts::PI.sqrt() } else { k as f64 / 2.0 });
            }
        }
        Family::Laguerre { alpha } => {
            for k in 0..n {
                let kf = k as f64;
                a.push(2.0 * kf + alpha + 1.0);
                b.push(if k == 0 { gamma(alpha + 1.0) } else { kf * (kf + alpha) });
            }
        }
        Family::Jacobi { alpha, beta } => {
            let ab = alpha + beta;
            for k in 0..n {
                let kf = k as f64;
                let s = 2.0 * kf + ab;
                a.push(if k == 0 {
                    (beta - alpha) / (ab + 2.0)
                } else {
                    (beta * beta - alpha * alpha) / (s * (s + 2.0))
                });
                b.push(match k {
                    0 => 2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0),
                    1 => 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab)),
                    _ => 4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0)),
                });
            }
        }
    }
    Ok(RecurrenceCoefficients { a, b })
}

/// Value and first derivative of the monic degree-n polynomial at `x`.
pub fn evaluate(spec: &PolynomialSpec, x: f64) -> Result<(f64, f64)> {
    let (p, dp, _) = evaluate_with_second(spec, x)?;
    Ok((p, dp))
}

/// Value, first and second derivative of the monic degree-n polynomial.
pub fn evaluate_with_second(spec: &PolynomialSpec, x: f64) -> Result<(f64, f64, f64)> {
    if !x.is_finite() {
        return Err(Error::NonFinite("evaluation point"));
    }
    let rec = recurrence(spec)?;
    Ok(run_recurrence(&rec, x))
}

fn run_recurrence(rec: &RecurrenceCoefficients, x: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut dp_prev, mut ddp_prev) = (0.0, 0.0, 0.0);
    let (mut p, mut dp, mut ddp) = (1.0, 0.0, 0.0);
    for k in 0..rec.a.len() {
        let t = x - rec.a[k];
        let bk = if k == 0 { 0.0 } else { rec.b[k] };
        let p_next = t * p - bk * p_prev;
        let dp_next = p + t * dp - bk * dp_prev;
        let ddp_next = 2.0 * dp + t * ddp - bk * ddp_prev;
        (p_prev, dp_prev, ddp_prev) = (p, dp, ddp);
        (p, dp, ddp) = (p_next, dp_next, ddp_next);
    }
    (p, dp, ddp)
}

/// Coefficients `(A, B, C)` of the family's ODE `A f'' + B f' + C f = 0` at `x`.
fn ode_coefficients(spec: &PolynomialSpec, x: f64) -> (f64, f64, f64) {
    let n = spec.degree as f64;
    match spec.family {
        Family::Hermite => (1.0, -2.0 * x, 2.0 * n),
        Family::Laguerre { alpha } => (x, alpha + 1.0 - x, n),
        Family::Jacobi { alpha, beta } => {
            (1.0 - x * x, beta - alpha - (alpha + beta + 2.0) * x, n * (n + alpha + beta + 1.0))
        }
    }
}

/// Residual of the family's second-order ODE evaluated on the monic polynomial.
pub fn ode_residual(spec: &PolynomialSpec, x: f64) -> Result<f64> {
    let (p, dp, ddp) = evaluate_with_second(spec, x)?;
    let (a, b, c) = ode_coefficients(spec, x);
    Ok(a * ddp + b * dp + c * p)
}

/// Sum of the magnitudes of the three ODE terms; the natural scale for
/// judging [`ode_residual`] in relative terms.
pub fn ode_scale(spec: &PolynomialSpec, x: f64) -> Result<f64> {
    let (p, dp, ddp) = evaluate_with_second(spec, x)?;
    let (a, b, c) = ode_coefficients(spec, x);
    Ok((a * ddp).abs() + (b * dp).abs() + (c * p).abs())
}

const EIGEN_MAX_ITER: usize = 10_000;

/// All `n` zeros of the monic polynomial, strictly increasing.
pub fn zeros(spec: &PolynomialSpec) -> Result<Vec<f64>> {
    let rec = recurrence(spec)?;
    let n = spec.degree;
    let jacobi_matrix = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rec.a[i]
        } else if i + 1 == j {
            rec.b[j].sqrt()
        } else if j + 1 == i {
            rec.b[i].sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jacobi_matrix, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNonConvergence(EIGEN_MAX_ITER))?;
    let mut roots: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    roots.sort_by(f64::total_cmp);

    for root in roots.iter_mut() {
        *root = polish(&rec, *root);
    }
    if let Family::Hermite = spec.family {
        // symmetric weight: zeros come in ± pairs
        for i in 0..n / 2 {
            let m = 0.5 * (roots[n - 1 - i] - roots[i]);
            roots[i] = -m;
            roots[n - 1 - i] = m;
        }
        if n % 2 == 1 {
            roots[n / 2] = 0.0;
        }
    }
    Ok(roots)
}

fn polish(rec: &RecurrenceCoefficients, mut x: f64) -> f64 {
    let (mut p, mut dp, _) = run_recurrence(rec, x);
    for _ in 0..4 {
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let trial = x - p / dp;
        let (tp, tdp, _) = run_recurrence(rec, trial);
        if tp.abs() >= p.abs() {
            break;
        }
        let done = (trial - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0);
        (x, p, dp) = (trial, tp, tdp);
        if done {
            break;
        }
    }
    x
}
