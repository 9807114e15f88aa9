//! Laughlin wavefunction, quasihole Berry connection, planar stationarity and
//! lowest-Landau-level ladder operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ReportRecord;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaughlinParams {
    #[serde(rename = "N")]
    pub n_particles: usize,
    pub m_exp: u32,
    #[serde(rename = "l_B")]
    pub l_b: f64,
}

impl LaughlinParams {
    pub fn new(n_particles: usize, m_exp: u32, l_b: f64) -> Result<Self> {
        let p = Self { n_particles, m_exp, l_b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 1 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        if self.m_exp.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("m_exp = {} must be a positive odd integer", self.m_exp)));
        }
        if !(self.l_b.is_finite() && self.l_b > 0.0) {
            return Err(Error::InvalidParameter(format!("l_B = {} must be positive", self.l_b)));
        }
        Ok(())
    }

    /// Gaussian confinement `Ω = 1/(4 l_B²)`.
    pub fn omega(&self) -> f64 {
        0.25 / (self.l_b * self.l_b)
    }

    /// Circumradius of the regular `N`-gon equilibrium, `l_B √(2 m (N-1))`.
    pub fn polygon_radius(&self) -> f64 {
        self.l_b * (2.0 * self.m_exp as f64 * (self.n_particles as f64 - 1.0)).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiholeSet {
    pub eta: Vec<Complex64>,
    pub nu: f64,
}

impl QuasiholeSet {
    pub fn new(eta: Vec<Complex64>, nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParameter(format!("filling fraction {nu} must be positive")));
        }
        check_distinct(&eta, "quasihole")?;
        Ok(Self { eta, nu })
    }
}

fn check_distinct(z: &[Complex64], what: &str) -> Result<()> {
    for (i, a) in z.iter().enumerate() {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        if let Some(j) = z[..i].iter().position(|b| b == a) {
            return Err(Error::Collision {
                first: format!("{what} {j}"),
                second: format!("{what} {i}"),
                distance: 0.0,
            });
        }
    }
    Ok(())
}

/// `Σ_{i<j} m log(z_j - z_i) - Σ_j |z_j|²/(4 l_B²)`, principal branch per
/// factor. Only the imaginary part depends on the branch, modulo 2π.
pub fn log_laughlin(z: &[Complex64], params: &LaughlinParams) -> Result<Complex64> {
    params.validate()?;
    check_distinct(z, "particle")?;
    let m = params.m_exp as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..z.len() {
        for i in 0..j {
            acc += m * (z[j] - z[i]).ln();
        }
        acc -= z[j].norm_sqr() * params.omega();
    }
    Ok(acc)
}

/// `A(η_j) = -(iν/2) Σ_{k≠j} 1/(η_k - η_j) + iν η̄_j/(4 l_B²)`.
pub fn berry_connection(holes: &QuasiholeSet, j: usize, l_b: f64) -> Result<Complex64> {
    if j >= holes.eta.len() {
        return Err(Error::InvalidParameter(format!("index {j} out of range")));
    }
    if !(l_b.is_finite() && l_b > 0.0) {
        return Err(Error::InvalidParameter(format!("l_B = {l_b} must be positive")));
    }
    check_distinct(&holes.eta, "quasihole")?;
    let ej = holes.eta[j];
    let pair: Complex64 = holes.eta.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, ek)| 1.0 / (ek - ej)).sum();
    Ok(-I * (holes.nu / 2.0) * pair + I * holes.nu * ej.conj() / (4.0 * l_b * l_b))
}

/// `S_j = Σ_{i≠j} m/(z_j - z_i) - z̄_j/(4 l_B²)`, the Wirtinger derivative
/// `∂/∂z_j` of [`log_laughlin`]. The adjoint equation is `conj(S_j)`.
pub fn laughlin_stationarity_residual(z: &[Complex64], params: &LaughlinParams) -> Result<Vec<Complex64>> {
    params.validate()?;
    check_distinct(z, "particle")?;
    Ok(residual_unchecked(z, params))
}

fn residual_unchecked(z: &[Complex64], params: &LaughlinParams) -> Vec<Complex64> {
    let m = params.m_exp as f64;
    let omega = params.omega();
    z.iter()
        .enumerate()
        .map(|(j, &zj)| {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, &zi) in z.iter().enumerate() {
                if i != j {
                    s += m / (zj - zi);
                }
            }
            s - omega * zj.conj()
        })
        .collect()
}

fn inf_norm(s: &[Complex64]) -> f64 {
    s.iter().fold(0.0, |m, v| m.max(v.re.abs()).max(v.im.abs()))
}

fn two_norm(s: &[Complex64]) -> f64 {
    s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Real Jacobian of `(Re S, Im S)` with respect to `(x_1, y_1, …)`.
fn real_jacobian(z: &[Complex64], params: &LaughlinParams) -> DMatrix<f64> {
    let n = z.len();
    let m = params.m_exp as f64;
    let omega = params.omega();
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        let mut d_self = Complex64::new(0.0, 0.0);
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = m / (z[j] - z[k]).powi(2);
            d_self -= d;
            // ∂S_j/∂z_k = d, no z̄_k dependence.
            set_block(&mut jac, j, k, d, Complex64::new(0.0, 0.0));
        }
        set_block(&mut jac, j, j, d_self, Complex64::new(-omega, 0.0));
    }
    jac
}

fn set_block(jac: &mut DMatrix<f64>, j: usize, k: usize, dz: Complex64, dzbar: Complex64) {
    let dx = dz + dzbar;
    let dy = I * (dz - dzbar);
    jac[(2 * j, 2 * k)] = dx.re;
    jac[(2 * j + 1, 2 * k)] = dx.im;
    jac[(2 * j, 2 * k + 1)] = dy.re;
    jac[(2 * j + 1, 2 * k + 1)] = dy.im;
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanarEquilibrium {
    pub params: LaughlinParams,
    pub positions: Vec<Complex64>,
    pub residual_inf: f64,
    pub iterations: usize,
}

impl PlanarEquilibrium {
    pub fn radii(&self) -> Vec<f64> {
        self.positions.iter().map(|z| z.norm()).collect()
    }

    pub fn to_record(&self) -> ReportRecord {
        let radii = self.radii();
        let n = radii.len() as f64;
        let mean = radii.iter().sum::<f64>() / n;
        let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        let mut extra = serde_json::Map::new();
        extra.insert("radius_mean".into(), serde_json::json!(mean));
        extra.insert("radius_min".into(), serde_json::json!(radii.iter().cloned().fold(f64::INFINITY, f64::min)));
        extra.insert("radius_max".into(), serde_json::json!(radii.iter().cloned().fold(0.0, f64::max)));
        extra.insert("radius_std".into(), serde_json::json!(var.sqrt()));
        extra.insert("polygon_radius".into(), serde_json::json!(self.params.polygon_radius()));
        ReportRecord {
            family: "laughlin".into(),
            parameters: serde_json::json!({
                "N": self.params.n_particles,
                "m_exp": self.params.m_exp,
                "l_B": self.params.l_b,
            }),
            n: self.positions.len(),
            positions: serde_json::json!(self.positions.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
            residual_inf: self.residual_inf,
            iterations: self.iterations,
            method: Some(serde_json::json!("newton")),
            certified: None,
            max_zero_deviation: None,
            extra,
        }
    }
}

pub const PLANAR_TOLERANCE: f64 = 1e-10;

/// Newton in `2N` real variables with least-squares steps (rotations form a
/// zero mode) and backtracking on `‖S‖₂`. Converged when `‖S‖_∞ ≤ tolerance`.
pub fn solve_planar_equilibrium(
    params: &LaughlinParams,
    guess: &[Complex64],
    tolerance: f64,
    max_iter: usize,
) -> Result<PlanarEquilibrium> {
    params.validate()?;
    if guess.len() != params.n_particles {
        return Err(Error::InvalidParameter(format!(
            "guess has {} positions, expected N = {}",
            guess.len(),
            params.n_particles
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} must be positive")));
    }
    check_distinct(guess, "particle")?;

    let n = guess.len();
    let mut z = guess.to_vec();
    let mut s = residual_unchecked(&z, params);
    let mut iterations = 0;
    while inf_norm(&s) > tolerance && iterations < max_iter {
        iterations += 1;
        let jac = real_jacobian(&z, params);
        let rhs = DVector::from_iterator(2 * n, s.iter().flat_map(|v| [-v.re, -v.im]));
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let Ok(step) = svd.solve(&rhs, cutoff) else { break };
        let norm = two_norm(&s);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<Complex64> =
                (0..n).map(|j| z[j] + t * Complex64::new(step[2 * j], step[2 * j + 1])).collect();
            if check_distinct(&trial, "particle").is_ok() {
                let st = residual_unchecked(&trial, params);
                if two_norm(&st) < norm {
                    z = trial;
                    s = st;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let residual = inf_norm(&s);
    if residual <= tolerance {
        Ok(PlanarEquilibrium { params: *params, positions: z, residual_inf: residual, iterations })
    } else {
        Err(Error::PlanarNonConvergence { positions: z, residual, iterations })
    }
}

/// Complex samples on a uniform square grid; `values[iy * nx + ix]` sits at
/// `(x0 + ix h, y0 + iy h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGrid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn from_fn(nx: usize, ny: usize, h: f64, x0: f64, y0: f64, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                values.push(f(Complex64::new(x0 + ix as f64 * h, y0 + iy as f64 * h)));
            }
        }
        Self { nx, ny, h, x0, y0, values }
    }

    /// `n × n` grid with spacing `h` centered on the origin.
    pub fn centered(n: usize, h: f64, f: impl Fn(Complex64) -> Complex64) -> Self {
        let half = (n as f64 - 1.0) * h / 2.0;
        Self::from_fn(n, n, h, -half, -half, f)
    }

    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.x0 + ix as f64 * self.h, self.y0 + iy as f64 * self.h)
    }

    /// `Σ conj(a) b h²`.
    pub fn inner(&self, other: &ComplexGrid) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.h * self.h
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.h * self.h).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::GridTooSmall(format!("{} x {} grid, need at least 3 x 3", self.nx, self.ny)));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(Error::InvalidParameter("grid value count does not match its shape".into()));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing {} must be positive", self.h)));
        }
        Ok(())
    }

    /// Second-order `∂_x` and `∂_y`, one-sided at the edges.
    fn gradients(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut gx = vec![Complex64::new(0.0, 0.0); nx * ny];
        let mut gy = gx.clone();
        for iy in 0..ny {
            for ix in 0..nx {
                let k = iy * nx + ix;
                gx[k] = diff(|i| self.values[iy * nx + i], ix, nx, self.h);
                gy[k] = diff(|i| self.values[i * nx + ix], iy, ny, self.h);
            }
        }
        (gx, gy)
    }
}

fn diff(f: impl Fn(usize) -> Complex64, i: usize, n: usize, h: f64) -> Complex64 {
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(i) - 4.0 * f(i - 1) + f(i - 2)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ladder {
    Lower,
    Raise,
}

/// `a = -i√2 (l_B ∂_z̄ + z/(4 l_B))`, `a† = -i√2 (l_B ∂_z - z̄/(4 l_B))`, so
/// that `[a, a†] = 1` and `a` annihilates `f(z) exp(-|z|²/(4 l_B²))`.
pub fn ladder_apply(field: &ComplexGrid, which: Ladder, l_b: f64) -> Result<ComplexGrid> {
    field.validate()?;
    if !(l_b.is_finite() && l_b > 0.0) {
        return Err(Error::InvalidParameter(format!("l_B = {l_b} must be positive")));
    }
    let (gx, gy) = field.gradients();
    let pre = -I * std::f64::consts::SQRT_2;
    let mut out = field.clone();
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let k = iy * field.nx + ix;
            let z = field.point(ix, iy);
            let f = field.values[k];
            out.values[k] = match which {
                Ladder::Lower => pre * (l_b * 0.5 * (gx[k] + I * gy[k]) + z * f / (4.0 * l_b)),
                Ladder::Raise => pre * (l_b * 0.5 * (gx[k] - I * gy[k]) - z.conj() * f / (4.0 * l_b)),
            };
        }
    }
    Ok(out)
}

/// `⟨(a a† - a† a)ψ, ψ⟩ / ⟨ψ, ψ⟩`.
pub fn commutator_expectation(field: &ComplexGrid, l_b: f64) -> Result<Complex64> {
    let a_ad = ladder_apply(&ladder_apply(field, Ladder::Raise, l_b)?, Ladder::Lower, l_b)?;
    let ad_a = ladder_apply(&ladder_apply(field, Ladder::Lower, l_b)?, Ladder::Raise, l_b)?;
    let mut comm = a_ad;
    for (c, d) in comm.values.iter_mut().zip(&ad_a.values) {
        *c -= d;
    }
    Ok(field.inner(&comm) / field.inner(field))
}

/// `f'' + Ω² r² f` on uniform radial samples `f(k h)`, `k = 0, 1, …`. Even
/// symmetry closes the stencil at `r = 0`; the last sample uses a one-sided
/// second-order stencil. This measures the residual and promises nothing
/// about its size.
pub fn dlu_residual(f: &[f64], omega: f64, h: f64) -> Result<Vec<f64>> {
    if f.len() < 4 {
        return Err(Error::GridTooSmall(format!("{} radial samples, need at least 4", f.len())));
    }
    if !(h.is_finite() && h > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter("radial spacing must be positive and Ω finite".into()));
    }
    let n = f.len();
    let h2 = h * h;
    Ok((0..n)
        .map(|k| {
            let d2 = if k == 0 {
                2.0 * (f[1] - f[0]) / h2
            } else if k == n - 1 {
                (2.0 * f[k] - 5.0 * f[k - 1] + 4.0 * f[k - 2] - f[k - 3]) / h2
            } else {
                (f[k + 1] - 2.0 * f[k] + f[k - 1]) / h2
            };
            let r = k as f64 * h;
            d2 + omega * omega * r * r * f[k]
        })
        .collect())
}

/// The mixed terms `Ω (z̄ ∂_z̄ - z ∂_z) f` on a planar grid. They vanish for
/// radial `f` up to discretization error.
pub fn dlu_mixed_terms(field: &ComplexGrid, omega: f64) -> Result<ComplexGrid> {
    field.validate()?;
    let (gx, gy) = field.gradients();
    let mut out = field.clone();
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let k = iy * field.nx + ix;
            let z = field.point(ix, iy);
            let dz = 0.5 * (gx[k] - I * gy[k]);
            let dzb = 0.5 * (gx[k] + I * gy[k]);
            out.values[k] = omega * (z.conj() * dzb - z * dz);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_laughlin_examples() {
        let p1 = LaughlinParams::new(1, 1, 1.0).unwrap();
        assert_eq!(log_laughlin(&[c(0.0, 0.0)], &p1).unwrap(), c(0.0, 0.0));
        let p = LaughlinParams::new(2, 1, 1.0).unwrap();
        let v = log_laughlin(&[c(1.0, 0.0), c(-1.0, 0.0)], &p).unwrap();
        assert_abs_diff_eq!(v.re, 2f64.ln() - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, PI, epsilon = 1e-15);
    }

    #[test]
    fn swap_adds_odd_multiple_of_pi() {
        let p = LaughlinParams::new(2, 3, 1.0).unwrap();
        let a = log_laughlin(&[c(0.3, 0.1), c(-0.2, 0.5)], &p).unwrap();
        let b = log_laughlin(&[c(-0.2, 0.5), c(0.3, 0.1)], &p).unwrap();
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
        let turns = (a.im - b.im) / PI;
        assert_abs_diff_eq!(turns.abs(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_particles_rejected() {
        let p = LaughlinParams::new(2, 1, 1.0).unwrap();
        assert!(matches!(log_laughlin(&[c(1.0, 0.0); 2], &p), Err(Error::Collision { .. })));
        assert!(laughlin_stationarity_residual(&[c(1.0, 0.0); 2], &p).is_err());
        assert!(QuasiholeSet::new(vec![c(0.0, 1.0); 2], 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LaughlinParams::new(2, 2, 1.0).is_err());
        assert!(LaughlinParams::new(0, 1, 1.0).is_err());
        assert!(LaughlinParams::new(2, 1, 0.0).is_err());
        let p = LaughlinParams::new(3, 1, 1.0).unwrap();
        assert_eq!(p.omega(), 0.25);
    }

    #[test]
    fn berry_connection_examples() {
        let one = QuasiholeSet::new(vec![c(0.0, 0.0)], 1.0).unwrap();
        assert_eq!(berry_connection(&one, 0, 1.0).unwrap(), c(0.0, 0.0));
        let a = 0.8;
        let two = QuasiholeSet::new(vec![c(a, 0.0), c(-a, 0.0)], 1.0).unwrap();
        let v = berry_connection(&two, 0, 1.0).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 1.0 / (4.0 * a) + a / 4.0, epsilon = 1e-15);

        let lb = 1.7;
        let a = lb * 2f64.sqrt();
        let two = QuasiholeSet::new(vec![c(a, 0.0), c(-a, 0.0)], 1.0).unwrap();
        let v = berry_connection(&two, 0, lb).unwrap();
        // Hand-expanded: -(i/2)/(-2a) + i a/(4 lb²).
        let expect = 0.25 / (lb * 2f64.sqrt()) + lb * 2f64.sqrt() / (4.0 * lb * lb);
        assert_abs_diff_eq!(v.im, expect, epsilon = 1e-14);
        assert!(berry_connection(&two, 2, lb).is_err());
    }

    #[test]
    fn residual_examples() {
        for m in [1u32, 3, 5] {
            let p = LaughlinParams::new(2, m, 1.3).unwrap();
            let a = 1.3 * (2.0 * m as f64).sqrt();
            let s = laughlin_stationarity_residual(&[c(a, 0.0), c(-a, 0.0)], &p).unwrap();
            assert!(inf_norm(&s) < 1e-14);
        }
        let p = LaughlinParams::new(1, 1, 2.0).unwrap();
        let s = laughlin_stationarity_residual(&[c(1.0, 2.0)], &p).unwrap();
        assert_abs_diff_eq!(s[0].re, -1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0].im, 2.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_is_wirtinger_derivative_of_log_psi() {
        let p = LaughlinParams::new(4, 3, 0.9).unwrap();
        let z = vec![c(0.3, -0.7), c(-1.1, 0.4), c(0.9, 0.8), c(-0.2, 1.6)];
        let s = laughlin_stationarity_residual(&z, &p).unwrap();
        let h = 1e-5;
        let wrap = |d: Complex64| c(d.re, d.im - 2.0 * PI * (d.im / (2.0 * PI)).round());
        for j in 0..z.len() {
            let shifted = |dz: Complex64| {
                let mut w = z.clone();
                w[j] += dz;
                log_laughlin(&w, &p).unwrap()
            };
            let dx = wrap(shifted(c(h, 0.0)) - shifted(c(-h, 0.0))) / (2.0 * h);
            let dy = wrap(shifted(c(0.0, h)) - shifted(c(0.0, -h))) / (2.0 * h);
            let wirtinger = 0.5 * (dx - I * dy);
            assert!((wirtinger - s[j]).norm() < 1e-6, "{j}: {wirtinger} vs {}", s[j]);
        }
    }

    #[test]
    fn rotation_and_conjugation_covariance() {
        let p = LaughlinParams::new(3, 1, 1.0).unwrap();
        let z = vec![c(0.3, -0.7), c(-1.1, 0.4), c(0.9, 0.8)];
        let s = laughlin_stationarity_residual(&z, &p).unwrap();
        let rot = Complex64::from_polar(1.0, 0.83);
        let zr: Vec<_> = z.iter().map(|v| rot * v).collect();
        let sr = laughlin_stationarity_residual(&zr, &p).unwrap();
        let zc: Vec<_> = z.iter().map(|v| v.conj()).collect();
        let sc = laughlin_stationarity_residual(&zc, &p).unwrap();
        for j in 0..3 {
            assert!((sr[j] - s[j] / rot).norm() < 1e-12);
            assert!((sc[j] - s[j].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn berry_connection_shares_structure_with_residual() {
        let z = vec![c(0.3, -0.7), c(-1.1, 0.4), c(0.9, 0.8)];
        let lb = 1.2;
        let nu = 1.0;
        let holes = QuasiholeSet::new(z.clone(), nu).unwrap();
        let p = LaughlinParams::new(3, 1, lb).unwrap();
        for j in 0..3 {
            let pair: Complex64 = (0..3).filter(|&i| i != j).map(|i| 1.0 / (z[j] - z[i])).sum();
            let gauss = z[j].conj() / (4.0 * lb * lb);
            let a = berry_connection(&holes, j, lb).unwrap();
            let s = laughlin_stationarity_residual(&z, &p).unwrap()[j];
            assert!((a - (I * nu / 2.0 * pair + I * nu * gauss)).norm() < 1e-14);
            assert!((s - (pair - gauss)).norm() < 1e-14);
        }
    }

    #[test]
    fn planar_pair_and_single() {
        let p = LaughlinParams::new(1, 1, 1.0).unwrap();
        let eq = solve_planar_equilibrium(&p, &[c(0.4, -0.3)], 1e-10, 50).unwrap();
        assert!(eq.positions[0].norm() < 1e-10);

        let p = LaughlinParams::new(2, 1, 1.0).unwrap();
        let eq = solve_planar_equilibrium(&p, &[c(1.0, 0.3), c(-0.5, -1.0)], 1e-10, 50).unwrap();
        for r in eq.radii() {
            assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn planar_triangle_matches_brute_force_radius() {
        // Independent oracle: minimize |S|² over the circumradius of an
        // equilateral triangle by golden-section search.
        let p = LaughlinParams::new(3, 1, 1.0).unwrap();
        let cost = |r: f64| {
            let z: Vec<_> = (0..3).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / 3.0)).collect();
            residual_unchecked(&z, &p).iter().map(|v| v.norm_sqr()).sum::<f64>()
        };
        let (mut lo, mut hi) = (0.1, 10.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if cost(a) < cost(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let r_brute = 0.5 * (lo + hi);

        let guess = [c(1.9, 0.2), c(-1.2, 1.5), c(-0.8, -1.9)];
        let eq = solve_planar_equilibrium(&p, &guess, 1e-10, 100).unwrap();
        assert!(eq.residual_inf <= 1e-10);
        for r in eq.radii() {
            assert_abs_diff_eq!(r, r_brute, epsilon = 1e-7);
        }
        let d: Vec<f64> = (0..3).map(|k| (eq.positions[k] - eq.positions[(k + 1) % 3]).norm()).collect();
        assert_abs_diff_eq!(d[0], d[1], epsilon = 1e-9);
        assert_abs_diff_eq!(d[1], d[2], epsilon = 1e-9);
    }

    #[test]
    fn planar_bad_input() {
        let p = LaughlinParams::new(2, 1, 1.0).unwrap();
        assert!(solve_planar_equilibrium(&p, &[c(1.0, 0.0)], 1e-10, 10).is_err());
        assert!(solve_planar_equilibrium(&p, &[c(1.0, 0.0); 2], 1e-10, 10).is_err());
        let err = solve_planar_equilibrium(&p, &[c(1.0, 0.0), c(-0.5, 0.2)], 1e-10, 0).unwrap_err();
        assert!(matches!(err, Error::PlanarNonConvergence { .. }));
    }

    fn gaussian(lb: f64) -> impl Fn(Complex64) -> Complex64 {
        move |z: Complex64| c((-z.norm_sqr() / (4.0 * lb * lb)).exp(), 0.0)
    }

    #[test]
    fn lowering_annihilates_lll_states() {
        let lb = 1.0;
        let mut prev = None;
        for n in [81, 161, 321] {
            let h = 16.0 / (n - 1) as f64;
            let psi = ComplexGrid::centered(n, h, |z| z * gaussian(lb)(z));
            let r = ladder_apply(&psi, Ladder::Lower, lb).unwrap().norm() / psi.norm();
            if let Some(p) = prev {
                let ratio: f64 = p / r;
                assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
            }
            prev = Some(r);
        }
    }

    #[test]
    fn raising_is_orthogonal_to_ground_state() {
        let lb = 0.8;
        let psi = ComplexGrid::centered(161, 0.1, gaussian(lb));
        let up = ladder_apply(&psi, Ladder::Raise, lb).unwrap();
        assert!(psi.inner(&up).norm() / (psi.norm() * up.norm()) < 1e-10);
    }

    #[test]
    fn commutator_is_one() {
        let psi = ComplexGrid::centered(161, 0.1, gaussian(1.0));
        let v = commutator_expectation(&psi, 1.0).unwrap();
        assert!((v - 1.0).norm() < 1e-2, "{v}");
    }

    #[test]
    fn ladder_rejects_tiny_grid() {
        let g = ComplexGrid::centered(2, 0.1, gaussian(1.0));
        assert!(matches!(ladder_apply(&g, Ladder::Lower, 1.0), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn dlu_examples() {
        let zero = vec![0.0; 10];
        assert!(dlu_residual(&zero, 0.25, 0.1).unwrap().iter().all(|v| *v == 0.0));
        let h = 0.01;
        let omega = 0.25;
        let f: Vec<f64> = (0..500).map(|k| (-(omega * k as f64 * h).powi(2) / 2.0).exp()).collect();
        let r = dlu_residual(&f, omega, h).unwrap();
        assert_eq!(r.len(), f.len());
        assert!(r.iter().all(|v| v.is_finite()));
        assert!(dlu_residual(&f[..3], omega, h).is_err());
    }

    #[test]
    fn dlu_mixed_terms_cancel_for_radial_input() {
        let mut prev = None;
        for n in [41, 81, 161] {
            let h = 8.0 / (n - 1) as f64;
            let g = ComplexGrid::centered(n, h, |z| c((-z.norm_sqr() / 2.0).exp() * (1.0 + z.norm_sqr()), 0.0));
            let m = dlu_mixed_terms(&g, 0.7).unwrap().norm();
            if let Some(p) = prev {
                assert!(m < p / 3.0, "{m} vs {p}");
            }
            prev = Some(m);
        }
        assert!(prev.unwrap() < 1e-3);
    }
}
