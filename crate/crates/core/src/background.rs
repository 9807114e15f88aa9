//! Background flows `W` entering the Kirchhoff equations.
//!
//! The same functions serve as superpotentials in the stationary (Stieltjes)
//! problem on the real line. In the vortex equations the background enters as
//! `dz̄_i/dt = Σ_j iκ_j/(z_i - z_j) + i W(z_i, z̄_i)`; with all strengths equal
//! to `-1` the stationary configurations on the real axis are exactly the
//! Stieltjes equilibria `Σ_j 1/(x_k - x_j) = W(x_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::PolynomialSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackgroundFlow {
    None,
    /// `W(z) = z`, harmonic-oscillator superpotential.
    HermiteLinear,
    /// `W(z) = 1/2 - (l+1)/z`, Coulomb superpotential.
    Coulomb {
        l: f64,
    },
    /// `W(z) = -p/(z-1) - q/(z+1)`: fixed charges `p` at +1 and `q` at -1.
    Jacobi {
        p: f64,
        q: f64,
    },
    /// `W(z, z̄) = Ω z̄`, the Gaussian confinement term of the Laughlin state.
    ConjugateLinear {
        omega: f64,
    },
    /// `W(z) = Σ_m r_m/(z - a_m) + Σ_k c_k z^k`.
    CustomRational {
        poles: Vec<Complex64>,
        residues: Vec<Complex64>,
        #[serde(default)]
        polynomial: Vec<Complex64>,
    },
}

impl BackgroundFlow {
    pub fn name(&self) -> &'static str {
        match self {
            BackgroundFlow::None => "none",
            BackgroundFlow::HermiteLinear => "hermite_linear",
            BackgroundFlow::Coulomb { .. } => "coulomb",
            BackgroundFlow::Jacobi { .. } => "jacobi",
            BackgroundFlow::ConjugateLinear { .. } => "conjugate_linear",
            BackgroundFlow::CustomRational { .. } => "custom_rational",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BackgroundFlow::None | BackgroundFlow::HermiteLinear => Ok(()),
            BackgroundFlow::Coulomb { l } => {
                if l.is_finite() && *l >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("Coulomb l = {l} must be >= 0")))
                }
            }
            BackgroundFlow::Jacobi { p, q } => {
                if p.is_finite() && q.is_finite() && *p > 0.0 && *q > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("Jacobi charges p = {p}, q = {q} must be positive")))
                }
            }
            BackgroundFlow::ConjugateLinear { omega } => {
                if omega.is_finite() && *omega > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("Ω = {omega} must be positive")))
                }
            }
            BackgroundFlow::CustomRational { poles, residues, polynomial } => {
                if poles.len() != residues.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{} poles but {} residues",
                        poles.len(),
                        residues.len()
                    )));
                }
                let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
                if !poles.iter().chain(residues).chain(polynomial).all(finite) {
                    return Err(Error::NonFinite("custom background coefficients"));
                }
                for (i, a) in poles.iter().enumerate() {
                    if poles[..i].iter().any(|b| b == a) {
                        return Err(Error::InvalidParameter(format!("duplicate pole {a}")));
                    }
                }
                Ok(())
            }
        }
    }

    /// `W(z, z̄)`.
    pub fn value(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            BackgroundFlow::None => Complex64::new(0.0, 0.0),
            BackgroundFlow::HermiteLinear => z,
            BackgroundFlow::Coulomb { l } => 0.5 - (l + 1.0) / z,
            BackgroundFlow::Jacobi { p, q } => -*p / (z - one) - *q / (z + one),
            BackgroundFlow::ConjugateLinear { omega } => *omega * z.conj(),
            BackgroundFlow::CustomRational { poles, residues, polynomial } => {
                let mut w = horner(polynomial, z);
                for (a, r) in poles.iter().zip(residues) {
                    w += r / (z - a);
                }
                w
            }
        }
    }

    /// Fixed singular points of the background.
    pub fn poles(&self) -> Vec<Complex64> {
        match self {
            BackgroundFlow::Coulomb { .. } => vec![Complex64::new(0.0, 0.0)],
            BackgroundFlow::Jacobi { .. } => {
                vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
            }
            BackgroundFlow::CustomRational { poles, .. } => poles.clone(),
            _ => Vec::new(),
        }
    }

    /// Whether `W` restricted to the real axis is real-valued, so that it can
    /// act as a superpotential for the stationary problem.
    pub fn is_real_on_axis(&self) -> bool {
        match self {
            BackgroundFlow::CustomRational { poles, residues, polynomial } => {
                poles.iter().chain(residues).chain(polynomial).all(|c| c.im == 0.0)
            }
            _ => true,
        }
    }

    /// Real-axis superpotential `W(x)`.
    pub fn real_value(&self, x: f64) -> f64 {
        self.value(Complex64::new(x, 0.0)).re
    }

    /// Real-axis derivative `W'(x)`.
    pub fn real_derivative(&self, x: f64) -> f64 {
        match self {
            BackgroundFlow::None => 0.0,
            BackgroundFlow::HermiteLinear => 1.0,
            BackgroundFlow::Coulomb { l } => (l + 1.0) / (x * x),
            BackgroundFlow::Jacobi { p, q } => p / (x - 1.0).powi(2) + q / (x + 1.0).powi(2),
            BackgroundFlow::ConjugateLinear { omega } => *omega,
            BackgroundFlow::CustomRational { poles, residues, polynomial } => {
                let mut d = 0.0;
                for (k, c) in polynomial.iter().enumerate().skip(1) {
                    d += k as f64 * c.re * x.powi(k as i32 - 1);
                }
                for (a, r) in poles.iter().zip(residues) {
                    d -= r.re / (x - a.re).powi(2);
                }
                d
            }
        }
    }

    /// Real-axis antiderivative `V(x)` with `V' = W`: the external
    /// potential of the electrostatic energy.
    pub fn real_antiderivative(&self, x: f64) -> f64 {
        match self {
            BackgroundFlow::None => 0.0,
            BackgroundFlow::HermiteLinear => 0.5 * x * x,
            BackgroundFlow::Coulomb { l } => 0.5 * x - (l + 1.0) * x.abs().ln(),
            BackgroundFlow::Jacobi { p, q } => -p * (x - 1.0).abs().ln() - q * (x + 1.0).abs().ln(),
            BackgroundFlow::ConjugateLinear { omega } => 0.5 * omega * x * x,
            BackgroundFlow::CustomRational { poles, residues, polynomial } => {
                let mut v = 0.0;
                for (k, c) in polynomial.iter().enumerate() {
                    v += c.re * x.powi(k as i32 + 1) / (k as f64 + 1.0);
                }
                for (a, r) in poles.iter().zip(residues) {
                    v += r.re * (x - a.re).abs().ln();
                }
                v
            }
        }
    }

    /// Orthogonal polynomial whose zeros are the `n`-point equilibria of this
    /// background, when one exists.
    pub fn polynomial_spec(&self, n: usize) -> Option<Result<PolynomialSpec>> {
        match self {
            BackgroundFlow::HermiteLinear => Some(PolynomialSpec::hermite(n)),
            BackgroundFlow::Coulomb { l } => Some(PolynomialSpec::coulomb(n, *l)),
            BackgroundFlow::Jacobi { p, q } => Some(PolynomialSpec::jacobi_charges(n, *p, *q)),
            _ => None,
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}
