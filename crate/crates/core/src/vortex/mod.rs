//! Kirchhoff equations for `n` point vortices in the plane.
//!
//! Positions are complex, `z = x + iy`; strengths `κ` are circulations with
//! physical constants absorbed. The velocity of vortex `i` is
//!
//! ```text
//! dz̄_i/dt = Σ_{j≠i} iκ_j / (z_i - z_j) + i W(z_i, z̄_i)
//! ```
//!
//! where `κ_j` is the strength of the *inducing* vortex. The system derived
//! from the free Schrödinger equation with `Γ = -ħ/2m` corresponds to
//! `κ_j = 2Γ`.
//!
//! The same vector field is also available from Hamilton's equations with
//! bracket `{x_k, y_k} = 1/κ_k` and `H = Σ_{i<j} κ_i κ_j ln|z_i - z_j| +
//! Σ_k κ_k φ(z_k)` ([`hamiltonian_rhs`]); the two routes share no code.

mod integrate;

pub use integrate::{integrate, DriftReport, IntegrationControls, Trajectory};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::background::BackgroundFlow;
use crate::error::{Error, Result};

/// Default minimum separation below which the model is considered broken.
pub const DEFAULT_COLLISION_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexConfiguration {
    pub positions: Vec<Complex64>,
    pub strengths: Vec<f64>,
    pub t: f64,
}

impl VortexConfiguration {
    pub fn new(positions: Vec<Complex64>, strengths: Vec<f64>, t: f64) -> Result<Self> {
        let cfg = Self { positions, strengths, t };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Vortices of equal strength `kappa`.
    pub fn uniform(positions: Vec<Complex64>, kappa: f64) -> Result<Self> {
        let strengths = vec![kappa; positions.len()];
        Self::new(positions, strengths, 0.0)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::InvalidParameter("at least one vortex is required".into()));
        }
        if self.positions.len() != self.strengths.len() {
            return Err(Error::InvalidParameter(format!(
                "{} positions but {} strengths",
                self.positions.len(),
                self.strengths.len()
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if self.positions.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vortex position"));
        }
        if let Some(k) = self.strengths.iter().position(|k| !k.is_finite() || *k == 0.0) {
            return Err(Error::InvalidParameter(format!("strength of vortex {k} must be finite and nonzero")));
        }
        check_separation(&self.positions, &BackgroundFlow::None, 0.0)
    }

    /// Smallest pairwise separation (infinite for a single vortex).
    pub fn min_separation(&self) -> f64 {
        min_separation(&self.positions)
    }

    /// Copy with all strengths negated (time reversal for `W = 0`).
    pub fn reversed(&self) -> Self {
        Self { positions: self.positions.clone(), strengths: self.strengths.iter().map(|k| -k).collect(), t: self.t }
    }
}

pub(crate) fn min_separation(positions: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            best = best.min((positions[i] - positions[j]).norm());
        }
    }
    best
}

/// Errors when two vortices, or a vortex and a background pole, are closer
/// than `eps`. With `eps = 0` only exact coincidence is rejected.
pub(crate) fn check_separation(positions: &[Complex64], bg: &BackgroundFlow, eps: f64) -> Result<()> {
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = (positions[i] - positions[j]).norm();
            if d <= eps {
                return Err(Error::Collision {
                    first: format!("vortex {i}"),
                    second: format!("vortex {j}"),
                    distance: d,
                });
            }
        }
        for pole in bg.poles() {
            let d = (positions[i] - pole).norm();
            if d <= eps {
                return Err(Error::Collision {
                    first: format!("vortex {i}"),
                    second: format!("background pole {pole}"),
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

/// Complex velocities `dz_i/dt` with the default collision threshold.
pub fn rhs(cfg: &VortexConfiguration, bg: &BackgroundFlow) -> Result<Vec<Complex64>> {
    rhs_with_eps(cfg, bg, DEFAULT_COLLISION_EPS)
}

pub fn rhs_with_eps(cfg: &VortexConfiguration, bg: &BackgroundFlow, eps: f64) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.len()];
    velocity_into(&cfg.positions, &cfg.strengths, bg, eps, &mut out)?;
    Ok(out)
}

/// Core of [`rhs`], writing into a caller-owned buffer. Summation runs in
/// ascending `j` so results are bit-reproducible.
pub(crate) fn velocity_into(
    positions: &[Complex64],
    strengths: &[f64],
    bg: &BackgroundFlow,
    eps: f64,
    out: &mut [Complex64],
) -> Result<()> {
    check_separation(positions, bg, eps)?;
    let i_unit = Complex64::i();
    for (i, (zi, slot)) in positions.iter().zip(out.iter_mut()).enumerate() {
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, (zj, kj)) in positions.iter().zip(strengths).enumerate() {
            if i != j {
                sum += *kj / (zi - zj);
            }
        }
        let zbar_dot = i_unit * (sum + bg.value(*zi));
        *slot = zbar_dot.conj();
    }
    Ok(())
}

/// Linear impulse, angular impulse and interaction energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedSet {
    /// `Q + iP = Σ κ_i z_i`
    pub impulse: Complex64,
    /// `I = Σ κ_i |z_i|²`
    pub angular_impulse: f64,
    /// `H = Σ_{i<j} κ_i κ_j ln|z_i - z_j|`
    pub energy: f64,
}

pub fn conserved(cfg: &VortexConfiguration) -> ConservedSet {
    let mut impulse = Complex64::new(0.0, 0.0);
    let mut angular_impulse = 0.0;
    let mut energy = 0.0;
    for (i, (zi, ki)) in cfg.positions.iter().zip(&cfg.strengths).enumerate() {
        impulse += *ki * zi;
        angular_impulse += ki * zi.norm_sqr();
        for (zj, kj) in cfg.positions.iter().zip(&cfg.strengths).skip(i + 1) {
            energy += ki * kj * (zi - zj).norm().ln();
        }
    }
    ConservedSet { impulse, angular_impulse, energy }
}

/// `{f, g} = Σ_k (1/κ_k)(∂f/∂x_k ∂g/∂y_k - ∂f/∂y_k ∂g/∂x_k)` by central
/// differences with step `h`.
pub fn poisson_bracket<F, G>(f: F, g: G, cfg: &VortexConfiguration, h: f64) -> Result<f64>
where
    F: Fn(&VortexConfiguration) -> f64,
    G: Fn(&VortexConfiguration) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("finite-difference step {h} must be positive")));
    }
    cfg.validate()?;
    let mut probe = cfg.clone();
    let mut partials = |k: usize, dir: Complex64| -> Result<(f64, f64)> {
        let base = cfg.positions[k];
        probe.positions[k] = base + dir * h;
        check_separation(&probe.positions, &BackgroundFlow::None, DEFAULT_COLLISION_EPS)?;
        let (fp, gp) = (f(&probe), g(&probe));
        probe.positions[k] = base - dir * h;
        check_separation(&probe.positions, &BackgroundFlow::None, DEFAULT_COLLISION_EPS)?;
        let (fm, gm) = (f(&probe), g(&probe));
        probe.positions[k] = base;
        Ok(((fp - fm) / (2.0 * h), (gp - gm) / (2.0 * h)))
    };
    let mut total = 0.0;
    for k in 0..cfg.len() {
        let (fx, gx) = partials(k, Complex64::new(1.0, 0.0))?;
        let (fy, gy) = partials(k, Complex64::new(0.0, 1.0))?;
        total += (fx * gy - fy * gx) / cfg.strengths[k];
    }
    Ok(total)
}

/// Gradient `(∂φ/∂x, ∂φ/∂y)` of the per-unit-strength background potential,
/// where vortex `k` contributes `κ_k φ(x_k, y_k)` to the Hamiltonian.
fn background_potential_gradient(bg: &BackgroundFlow, x: f64, y: f64) -> Result<(f64, f64)> {
    Ok(match bg {
        BackgroundFlow::None => (0.0, 0.0),
        // φ = (x² - y²)/2
        BackgroundFlow::HermiteLinear => (x, -y),
        // φ = x/2 - (l+1) ln r
        BackgroundFlow::Coulomb { l } => {
            let r2 = x * x + y * y;
            (0.5 - (l + 1.0) * x / r2, -(l + 1.0) * y / r2)
        }
        // φ = -p ln|z-1| - q ln|z+1|
        BackgroundFlow::Jacobi { p, q } => {
            let rm = (x - 1.0).powi(2) + y * y;
            let rp = (x + 1.0).powi(2) + y * y;
            (-p * (x - 1.0) / rm - q * (x + 1.0) / rp, -p * y / rm - q * y / rp)
        }
        // φ = Ω (x² + y²)/2
        BackgroundFlow::ConjugateLinear { omega } => (omega * x, omega * y),
        BackgroundFlow::CustomRational { .. } => return Err(Error::UnsupportedBackground("custom_rational")),
    })
}

/// Velocities from Hamilton's equations `ẋ_k = {x_k, H}`, `ẏ_k = {y_k, H}`
/// with analytic gradients of the total Hamiltonian.
pub fn hamiltonian_rhs(cfg: &VortexConfiguration, bg: &BackgroundFlow) -> Result<Vec<Complex64>> {
    bg.validate()?;
    cfg.validate()?;
    check_separation(&cfg.positions, bg, DEFAULT_COLLISION_EPS)?;
    let n = cfg.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (xk, yk) = (cfg.positions[k].re, cfg.positions[k].im);
        let kk = cfg.strengths[k];
        let (mut hx, mut hy) = background_potential_gradient(bg, xk, yk)?;
        hx *= kk;
        hy *= kk;
        for j in 0..n {
            if j == k {
                continue;
            }
            let dx = xk - cfg.positions[j].re;
            let dy = yk - cfg.positions[j].im;
            let r2 = dx * dx + dy * dy;
            let c = kk * cfg.strengths[j] / r2;
            hx += c * dx;
            hy += c * dy;
        }
        // {x_k, H} = (1/κ_k) ∂H/∂y_k,  {y_k, H} = -(1/κ_k) ∂H/∂x_k
        out.push(Complex64::new(hy / kk, -hx / kk));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pair_velocity() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1.0).unwrap();
        let v = rhs(&cfg, &BackgroundFlow::None).unwrap();
        assert_abs_diff_eq!(v[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0].im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn schrodinger_pair_on_real_axis() {
        // κ = 2Γ: dz̄_1/dt = 2Γi/(x_1 - x_2), dz̄_2/dt = 2Γi/(x_2 - x_1)
        let gamma = -0.5;
        let (x1, x2) = (0.4, -1.1);
        let cfg = VortexConfiguration::uniform(vec![c(x1, 0.0), c(x2, 0.0)], 2.0 * gamma).unwrap();
        let v = rhs(&cfg, &BackgroundFlow::None).unwrap();
        let expect1 = Complex64::i() * (2.0 * gamma) / (x1 - x2);
        let expect2 = Complex64::i() * (2.0 * gamma) / (x2 - x1);
        assert_abs_diff_eq!((v[0].conj() - expect1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((v[1].conj() - expect2).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_vortex_is_still() {
        let cfg = VortexConfiguration::uniform(vec![c(0.3, -2.0)], 4.0).unwrap();
        assert_eq!(rhs(&cfg, &BackgroundFlow::None).unwrap()[0], c(0.0, 0.0));
        assert_eq!(hamiltonian_rhs(&cfg, &BackgroundFlow::None).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn collision_is_reported() {
        let cfg = VortexConfiguration::uniform(vec![c(0.0, 0.0), c(1e-13, 0.0)], 1.0).unwrap();
        assert!(matches!(rhs(&cfg, &BackgroundFlow::None), Err(Error::Collision { .. })));
        let cfg = VortexConfiguration::uniform(vec![c(1e-14, 0.0)], 1.0).unwrap();
        assert!(matches!(rhs(&cfg, &BackgroundFlow::Coulomb { l: 0.0 }), Err(Error::Collision { .. })));
    }

    #[test]
    fn conserved_examples() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1.0).unwrap();
        let s = conserved(&cfg);
        assert_abs_diff_eq!(s.impulse.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.angular_impulse, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.energy, 2f64.ln(), epsilon = 1e-15);

        let single = VortexConfiguration::uniform(vec![c(1.0, 1.0)], 1.0).unwrap();
        assert_eq!(conserved(&single).energy, 0.0);

        let dipole = VortexConfiguration::new(vec![c(1.0, 0.0), c(-1.0, 0.0)], vec![1.0, -1.0], 0.0).unwrap();
        assert_abs_diff_eq!(conserved(&dipole).angular_impulse, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bracket_examples() {
        let cfg = VortexConfiguration::new(vec![c(0.3, 0.7), c(-1.0, 0.2)], vec![2.0, 1.0], 0.0).unwrap();
        let x1 = |s: &VortexConfiguration| s.positions[0].re;
        let y1 = |s: &VortexConfiguration| s.positions[0].im;
        let y2 = |s: &VortexConfiguration| s.positions[1].im;
        let ang = |s: &VortexConfiguration| conserved(s).angular_impulse;
        assert_abs_diff_eq!(poisson_bracket(x1, y1, &cfg, 1e-4).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(poisson_bracket(x1, y2, &cfg, 1e-4).unwrap(), 0.0, epsilon = 1e-12);
        // {x_1, I} = (1/κ_1) ∂I/∂y_1 = 2 y_1
        assert_abs_diff_eq!(poisson_bracket(x1, ang, &cfg, 1e-4).unwrap(), 2.0 * 0.7, epsilon = 1e-8);
        let ab = poisson_bracket(x1, ang, &cfg, 1e-4).unwrap();
        let ba = poisson_bracket(ang, x1, &cfg, 1e-4).unwrap();
        assert_abs_diff_eq!(ab, -ba, epsilon = 1e-12);
    }

    #[test]
    fn bracket_stencil_collision() {
        let cfg = VortexConfiguration::uniform(vec![c(0.0, 0.0), c(1e-3, 0.0)], 1.0).unwrap();
        let x1 = |s: &VortexConfiguration| s.positions[0].re;
        assert!(matches!(poisson_bracket(x1, x1, &cfg, 1e-3), Err(Error::Collision { .. })));
    }

    #[test]
    fn bracket_reproduces_hamiltonian_flow() {
        // ẋ_k = {x_k, H} by finite differences matches rhs for W = 0
        let cfg =
            VortexConfiguration::new(vec![c(0.3, 0.7), c(-1.0, 0.2), c(0.5, -0.9)], vec![1.5, -0.7, 1.0], 0.0).unwrap();
        let v = rhs(&cfg, &BackgroundFlow::None).unwrap();
        let energy = |s: &VortexConfiguration| conserved(s).energy;
        for (k, vk) in v.iter().enumerate() {
            let xk = move |s: &VortexConfiguration| s.positions[k].re;
            let yk = move |s: &VortexConfiguration| s.positions[k].im;
            assert_abs_diff_eq!(poisson_bracket(xk, energy, &cfg, 1e-5).unwrap(), vk.re, epsilon = 1e-8);
            assert_abs_diff_eq!(poisson_bracket(yk, energy, &cfg, 1e-5).unwrap(), vk.im, epsilon = 1e-8);
        }
    }

    #[test]
    fn hamiltonian_route_matches_direct_rhs() {
        let cfg =
            VortexConfiguration::new(vec![c(0.3, 0.7), c(-0.4, 0.2), c(0.5, -0.6)], vec![1.5, -0.7, 1.0], 0.0).unwrap();
        for bg in [
            BackgroundFlow::None,
            BackgroundFlow::HermiteLinear,
            BackgroundFlow::Coulomb { l: 1.0 },
            BackgroundFlow::Jacobi { p: 0.5, q: 1.5 },
            BackgroundFlow::ConjugateLinear { omega: 0.25 },
        ] {
            let a = rhs(&cfg, &bg).unwrap();
            let b = hamiltonian_rhs(&cfg, &bg).unwrap();
            for (u, w) in a.iter().zip(&b) {
                assert!((u - w).norm() <= 1e-12 * u.norm().max(1.0), "{bg:?}: {u} vs {w}");
            }
        }
    }

    #[test]
    fn custom_background_has_no_hamiltonian() {
        let cfg = VortexConfiguration::uniform(vec![c(0.3, 0.7)], 1.0).unwrap();
        let bg = BackgroundFlow::CustomRational { poles: vec![], residues: vec![], polynomial: vec![c(1.0, 0.0)] };
        assert!(matches!(hamiltonian_rhs(&cfg, &bg), Err(Error::UnsupportedBackground(_))));
    }

    #[test]
    fn stationary_on_hermite_zeros() {
        // κ = 2Γ = -1 with W = x: the Hermite zeros do not move
        let zeros = crate::orthopoly::zeros(&crate::orthopoly::PolynomialSpec::hermite(5).unwrap()).unwrap();
        let cfg = VortexConfiguration::uniform(zeros.iter().map(|&x| c(x, 0.0)).collect(), -1.0).unwrap();
        for v in rhs(&cfg, &BackgroundFlow::HermiteLinear).unwrap() {
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn invalid_configurations() {
        assert!(VortexConfiguration::new(vec![], vec![], 0.0).is_err());
        assert!(VortexConfiguration::new(vec![c(0.0, 0.0)], vec![0.0], 0.0).is_err());
        assert!(VortexConfiguration::new(vec![c(0.0, 0.0); 2], vec![1.0; 2], 0.0).is_err());
        assert!(VortexConfiguration::new(vec![c(0.0, 0.0)], vec![1.0, 2.0], 0.0).is_err());
    }
}
