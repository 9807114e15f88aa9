//! Paraxial beam propagation, Laguerre-Gaussian modes and optical vortex
//! detection.
//!
//! The envelope `u(x, y, z)` of `ψ = u e^{ikz}` obeys
//! `∂u/∂z = (i/2k)(∂²_x + ∂²_y) u` once `∂²_z u` is dropped from the Helmholtz
//! equation. Free-space steps are applied exactly in Fourier space.
//!
//! Grids are periodic with `x_i = (i - (nx-1)/2) dx`, so the optical axis sits
//! at the center of the middle plaquette. Samples are stored row-major with
//! `x` fastest: `amplitude[iy * nx + ix]`.

pub mod fft;
pub mod io;

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use fft::{frequencies, Fft2};

/// Energy fraction in the outer quarter of the spectrum above which
/// propagation is considered aliased.
pub const ALIASING_LIMIT: f64 = 0.01;
/// Samples below this fraction of the peak amplitude carry no usable phase.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BeamField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub k: f64,
    pub z: f64,
    pub amplitude: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub k: f64,
}

impl GridSpec {
    pub fn square(n: usize, d: f64, k: f64) -> Self {
        Self { nx: n, ny: n, dx: d, dy: d, k }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::InvalidParameter(format!("{name} = {n} must be a power of two >= 16")));
            }
        }
        for (name, v) in [("dx", self.dx), ("dy", self.dy), ("k", self.k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny as f64 - 1.0) / 2.0) * self.dy
    }
}

impl BeamField {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, k: f64, z: f64, amplitude: Vec<Complex64>) -> Result<Self> {
        GridSpec { nx, ny, dx, dy, k }.validate()?;
        if !z.is_finite() {
            return Err(Error::NonFinite("z"));
        }
        if amplitude.len() != nx * ny {
            return Err(Error::InvalidParameter(format!("{} samples for a {nx} x {ny} grid", amplitude.len())));
        }
        if amplitude.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("field amplitude"));
        }
        Ok(Self { nx, ny, dx, dy, k, z, amplitude })
    }

    pub fn from_fn(grid: &GridSpec, z: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        grid.validate()?;
        let mut amplitude = Vec::with_capacity(grid.nx * grid.ny);
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                amplitude.push(f(grid.x(ix), grid.y(iy)));
            }
        }
        Self::new(grid.nx, grid.ny, grid.dx, grid.dy, grid.k, z, amplitude)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { nx: self.nx, ny: self.ny, dx: self.dx, dy: self.dy, k: self.k }
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.grid().x(ix)
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.grid().y(iy)
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitude[iy * self.nx + ix]
    }

    /// `Σ |u|² dx dy`.
    pub fn energy(&self) -> f64 {
        self.amplitude.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.amplitude.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Bilinear interpolation at fractional index coordinates.
    pub fn sample(&self, fx: f64, fy: f64) -> Complex64 {
        let ix = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let iy = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let (s, t) = (fx - ix as f64, fy - iy as f64);
        self.at(ix, iy) * (1.0 - s) * (1.0 - t)
            + self.at(ix + 1, iy) * s * (1.0 - t)
            + self.at(ix + 1, iy + 1) * s * t
            + self.at(ix, iy + 1) * (1.0 - s) * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LGModeSpec {
    pub p: u32,
    pub ell: i32,
    pub w0: f64,
}

impl LGModeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.w0.is_finite() && self.w0 > 0.0) {
            return Err(Error::InvalidParameter(format!("waist w0 = {} must be positive", self.w0)));
        }
        Ok(())
    }

    pub fn rayleigh_range(&self, k: f64) -> f64 {
        0.5 * k * self.w0 * self.w0
    }
}

/// Generalized Laguerre polynomial `L_p^α(x)` by its three-term recurrence.
fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + alpha - x);
    if p == 0 {
        return prev;
    }
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `LG_{p,ℓ}` at its waist, normalized so that `Σ |u|² dx dy = 1`.
pub fn lg_mode(spec: &LGModeSpec, grid: &GridSpec) -> Result<BeamField> {
    spec.validate()?;
    grid.validate()?;
    if spec.w0 < 8.0 * grid.dx || spec.w0 < 8.0 * grid.dy {
        return Err(Error::Resolution(format!(
            "waist {} spans fewer than 8 samples (dx = {}, dy = {})",
            spec.w0, grid.dx, grid.dy
        )));
    }
    if (grid.nx as f64) * grid.dx < 6.0 * spec.w0 || (grid.ny as f64) * grid.dy < 6.0 * spec.w0 {
        return Err(Error::GridTooSmall(format!("grid extent must be at least 6 w0 = {}", 6.0 * spec.w0)));
    }
    let l = spec.ell.unsigned_abs() as i32;
    let w0 = spec.w0;
    let mut field = BeamField::from_fn(grid, 0.0, |x, y| {
        let r2 = x * x + y * y;
        let u = 2.0 * r2 / (w0 * w0);
        // ρ^ℓ e^{-ρ²/2} scaled to peak at one; the factors alone overflow for large ℓ.
        let lf = l as f64;
        let envelope = if l == 0 { (-0.5 * u).exp() } else { (0.5 * lf * (u / lf).ln() - 0.5 * (u - lf)).exp() };
        let radial = envelope * laguerre(spec.p, l as f64, u);
        Complex64::from_polar(radial, spec.ell as f64 * y.atan2(x))
    })?;
    let norm = field.energy().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Resolution(format!(
            "mode p = {}, ell = {} has no representable energy on this grid",
            spec.p, spec.ell
        )));
    }
    for v in &mut field.amplitude {
        *v /= norm;
    }
    Ok(field)
}

/// Fraction of spectral energy with `|k_x|` or `|k_y|` above three quarters
/// of the Nyquist frequency.
pub fn aliasing_fraction(field: &BeamField) -> Result<f64> {
    let plan = Fft2::new(field.nx, field.ny)?;
    let mut spec = field.amplitude.clone();
    plan.forward(&mut spec);
    let kx = frequencies(field.nx, field.dx);
    let ky = frequencies(field.ny, field.dy);
    let (cx, cy) = (0.75 * PI / field.dx, 0.75 * PI / field.dy);
    let mut total = 0.0;
    let mut outer = 0.0;
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let e = spec[iy * field.nx + ix].norm_sqr();
            total += e;
            if kx[ix].abs() > cx || ky[iy].abs() > cy {
                outer += e;
            }
        }
    }
    Ok(if total > 0.0 { outer / total } else { 0.0 })
}

/// `steps` exact free-space steps of length `dz` (negative `dz` propagates
/// backwards). Logs a warning when the spectrum is aliased.
pub fn propagate(field: &BeamField, dz: f64, steps: usize) -> Result<BeamField> {
    if !dz.is_finite() || !(dz * steps as f64).is_finite() {
        return Err(Error::NonFinite("propagation distance"));
    }
    let aliased = aliasing_fraction(field)?;
    if aliased > ALIASING_LIMIT {
        log::warn!("{:.3}% of the beam energy lies in the outer quarter of the spectrum", 100.0 * aliased);
    }
    let plan = Fft2::new(field.nx, field.ny)?;
    let kx = frequencies(field.nx, field.dx);
    let ky = frequencies(field.ny, field.dy);
    let mut kernel = Vec::with_capacity(field.nx * field.ny);
    for &qy in &ky {
        for &qx in &kx {
            kernel.push(Complex64::from_polar(1.0, -(qx * qx + qy * qy) * dz / (2.0 * field.k)));
        }
    }
    let mut out = field.clone();
    for _ in 0..steps {
        plan.forward(&mut out.amplitude);
        for (v, w) in out.amplitude.iter_mut().zip(&kernel) {
            *v *= w;
        }
        plan.inverse(&mut out.amplitude);
    }
    out.z = field.z + dz * steps as f64;
    Ok(out)
}

/// Second-moment centroid `(x̄, ȳ)` of the intensity.
pub fn centroid(field: &BeamField) -> (f64, f64) {
    let (mut e, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let w = field.at(ix, iy).norm_sqr();
            e += w;
            sx += w * field.x(ix);
            sy += w * field.y(iy);
        }
    }
    if e > 0.0 {
        (sx / e, sy / e)
    } else {
        (0.0, 0.0)
    }
}

/// Second-moment widths `(2σ_x, 2σ_y)`; equal to `w` for a Gaussian
/// `exp(-r²/w²)` envelope.
pub fn beam_width(field: &BeamField) -> (f64, f64) {
    let (cx, cy) = centroid(field);
    let (mut e, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for iy in 0..field.ny {
        for ix in 0..field.nx {
            let w = field.at(ix, iy).norm_sqr();
            e += w;
            vx += w * (field.x(ix) - cx).powi(2);
            vy += w * (field.y(iy) - cy).powi(2);
        }
    }
    if e > 0.0 {
        (2.0 * (vx / e).sqrt(), 2.0 * (vy / e).sqrt())
    } else {
        (0.0, 0.0)
    }
}

/// Circular loop in fractional index coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeLoop {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl ChargeLoop {
    /// Loop around the optical axis.
    pub fn centered(field: &BeamField, radius: f64) -> Self {
        Self { cx: (field.nx as f64 - 1.0) / 2.0, cy: (field.ny as f64 - 1.0) / 2.0, radius }
    }

    pub fn samples(&self) -> usize {
        64usize.max((4.0 * TAU * self.radius).ceil() as usize)
    }
}

fn wrap(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

/// Net phase winding around `lp`, in units of 2π.
pub fn topological_charge(field: &BeamField, lp: &ChargeLoop) -> Result<i64> {
    let (nx, ny) = (field.nx as f64 - 1.0, field.ny as f64 - 1.0);
    if !(lp.radius > 0.0)
        || lp.cx - lp.radius < 0.0
        || lp.cy - lp.radius < 0.0
        || lp.cx + lp.radius > nx
        || lp.cy + lp.radius > ny
    {
        return Err(Error::InvalidParameter(format!("loop {lp:?} does not fit inside the grid")));
    }
    let peak = field.peak_amplitude();
    let count = lp.samples();
    let pts: Vec<Complex64> = (0..count)
        .map(|s| {
            let th = TAU * s as f64 / count as f64;
            field.sample(lp.cx + lp.radius * th.cos(), lp.cy + lp.radius * th.sin())
        })
        .collect();
    let weakest = pts.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
    if peak == 0.0 || weakest < AMPLITUDE_FLOOR * peak {
        return Err(Error::AmplitudeTooSmall { ratio: if peak > 0.0 { weakest / peak } else { 0.0 } });
    }
    let total: f64 = (0..count).map(|s| wrap(pts[(s + 1) % count].arg() - pts[s].arg())).sum();
    Ok((total / TAU).round() as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    pub charge: i64,
}

/// Wrapped steps above this make a plaquette winding untrustworthy.
const STEP_LIMIT: f64 = PI / 3.0;
/// Largest wrapped step accepted on a validating box boundary.
const BOX_STEP_LIMIT: f64 = PI / 2.0;

struct Scan<'a> {
    field: &'a BeamField,
    phase: Vec<f64>,
    alive: Vec<bool>,
}

impl Scan<'_> {
    fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.field.nx + ix
    }

    /// Winding and largest step along a closed node path.
    fn wind(&self, path: &[(usize, usize)]) -> Option<(i64, f64)> {
        let mut sum = 0.0;
        let mut worst: f64 = 0.0;
        for (a, b) in path.iter().zip(path.iter().cycle().skip(1)) {
            let (na, nb) = (self.node(a.0, a.1), self.node(b.0, b.1));
            if !self.alive[na] || !self.alive[nb] {
                return None;
            }
            let d = wrap(self.phase[nb] - self.phase[na]);
            sum += d;
            worst = worst.max(d.abs());
        }
        Some(((sum / TAU).round() as i64, worst))
    }

    /// Counterclockwise boundary of the node box `[x0, x1] × [y0, y1]`.
    fn boundary(x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<(usize, usize)> {
        let mut p = Vec::new();
        p.extend((x0..x1).map(|x| (x, y0)));
        p.extend((y0..y1).map(|y| (x1, y)));
        p.extend((x0 + 1..=x1).rev().map(|x| (x, y1)));
        p.extend((y0 + 1..=y1).rev().map(|y| (x0, y)));
        p
    }

    /// Bilinear zero of the plaquette at `(ix, iy)` in physical coordinates.
    fn refine(&self, ix: usize, iy: usize) -> (f64, f64) {
        let f = self.field;
        let (u00, u10, u11, u01) = (f.at(ix, iy), f.at(ix + 1, iy), f.at(ix + 1, iy + 1), f.at(ix, iy + 1));
        let (mut s, mut t) = (0.5, 0.5);
        let mut converged = false;
        for _ in 0..30 {
            let u = u00 * (1.0 - s) * (1.0 - t) + u10 * s * (1.0 - t) + u11 * s * t + u01 * (1.0 - s) * t;
            let us = (u10 - u00) * (1.0 - t) + (u11 - u01) * t;
            let ut = (u01 - u00) * (1.0 - s) + (u11 - u10) * s;
            let det = us.re * ut.im - ut.re * us.im;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let ds = -(u.re * ut.im - ut.re * u.im) / det;
            let dt = -(us.re * u.im - u.re * us.im) / det;
            s += ds;
            t += dt;
            if ds.abs().max(dt.abs()) < 1e-13 {
                converged = true;
                break;
            }
        }
        if !converged || !(-0.01..=1.01).contains(&s) || !(-0.01..=1.01).contains(&t) {
            (s, t) = (0.5, 0.5);
        }
        (f.x(ix) + s.clamp(0.0, 1.0) * f.dx, f.y(iy) + t.clamp(0.0, 1.0) * f.dy)
    }
}

/// Plaquette phase-winding scan with sub-cell refinement.
///
/// Plaquettes with a nonzero winding or a large phase step are clustered and
/// each cluster is checked against the winding around an enclosing box whose
/// boundary is well resolved. When the plaquette windings disagree with the
/// box (as for a degenerate `|ℓ| ≥ 2` core, whose phase steps alias at
/// plaquette scale) the cluster is reported as one vortex carrying the box
/// charge, placed at its weakest plaquette.
pub fn find_vortices(field: &BeamField) -> Vec<Vortex> {
    let (nx, ny) = (field.nx, field.ny);
    let peak = field.peak_amplitude();
    if peak == 0.0 {
        return Vec::new();
    }
    let scan = Scan {
        field,
        phase: field.amplitude.iter().map(|v| v.arg()).collect(),
        alive: field.amplitude.iter().map(|v| v.norm() >= AMPLITUDE_FLOOR * peak).collect(),
    };
    let (px, py) = (nx - 1, ny - 1);
    let mut winding = vec![0i64; px * py];
    let mut candidate = vec![false; px * py];
    for iy in 0..py {
        for ix in 0..px {
            let cell = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
            if let Some((w, worst)) = scan.wind(&cell) {
                winding[iy * px + ix] = w;
                candidate[iy * px + ix] = w != 0 || worst > STEP_LIMIT;
            }
        }
    }

    let mut consumed = vec![false; px * py];
    let mut found = Vec::new();
    for start in 0..px * py {
        if !candidate[start] || consumed[start] {
            continue;
        }
        // 8-connected cluster of candidate plaquettes.
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        consumed[start] = true;
        while let Some(c) = queue.pop_front() {
            members.push(c);
            let (cx, cy) = ((c % px) as isize, (c / px) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (qx, qy) = (cx + dx, cy + dy);
                    if qx < 0 || qy < 0 || qx >= px as isize || qy >= py as isize {
                        continue;
                    }
                    let q = qy as usize * px + qx as usize;
                    if candidate[q] && !consumed[q] {
                        consumed[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        let x0 = members.iter().map(|c| c % px).min().unwrap();
        let x1 = members.iter().map(|c| c % px).max().unwrap() + 1;
        let y0 = members.iter().map(|c| c / px).min().unwrap();
        let y1 = members.iter().map(|c| c / px).max().unwrap() + 1;

        let mut validated = None;
        for g in 0..nx.max(ny) {
            if x0 < g || y0 < g || x1 + g >= nx || y1 + g >= ny {
                break;
            }
            let (bx0, bx1, by0, by1) = (x0 - g, x1 + g, y0 - g, y1 + g);
            if let Some((w, worst)) = scan.wind(&Scan::boundary(bx0, bx1, by0, by1)) {
                if worst <= BOX_STEP_LIMIT {
                    validated = Some((w, bx0, bx1, by0, by1));
                    break;
                }
            }
        }

        let emit = |cells: &[usize], out: &mut Vec<Vortex>| {
            for &c in cells {
                if winding[c] != 0 {
                    let (x, y) = scan.refine(c % px, c / px);
                    out.push(Vortex { x, y, charge: winding[c] });
                }
            }
        };
        match validated {
            Some((w, bx0, bx1, by0, by1)) => {
                let inside: Vec<usize> =
                    (by0..by1).flat_map(|y| (bx0..bx1).map(move |x| y * px + x)).filter(|&c| candidate[c]).collect();
                for &c in &inside {
                    consumed[c] = true;
                }
                let sum: i64 = inside.iter().map(|&c| winding[c]).sum();
                if sum == w {
                    emit(&inside, &mut found);
                } else if w != 0 {
                    let weakest = |c: &usize| {
                        let (ix, iy) = (c % px, c / px);
                        field.at(ix, iy).norm()
                            + field.at(ix + 1, iy).norm()
                            + field.at(ix + 1, iy + 1).norm()
                            + field.at(ix, iy + 1).norm()
                    };
                    let core =
                        *inside.iter().min_by(|a, b| weakest(a).total_cmp(&weakest(b))).expect("cluster is not empty");
                    let (x, y) = scan.refine(core % px, core / px);
                    found.push(Vortex { x, y, charge: w });
                }
            }
            None => emit(&members, &mut found),
        }
    }
    found
}

/// `‖∂²_z u‖ / ‖2k ∂_z u‖` from central differences over `±dz`; zero when
/// the field does not evolve.
pub fn paraxial_validity(field: &BeamField, dz: f64) -> Result<f64> {
    if !(dz.is_finite() && dz > 0.0) {
        return Err(Error::InvalidParameter(format!("dz = {dz} must be positive")));
    }
    let fwd = propagate(field, dz, 1)?;
    let back = propagate(field, -dz, 1)?;
    let (mut d1, mut d2) = (0.0, 0.0);
    for ((p, m), u) in fwd.amplitude.iter().zip(&back.amplitude).zip(&field.amplitude) {
        d1 += ((p - m) / (2.0 * dz)).norm_sqr();
        d2 += ((p - 2.0 * u + m) / (dz * dz)).norm_sqr();
    }
    let (num, den) = (d2.sqrt(), 2.0 * field.k * d1.sqrt());
    Ok(if den == 0.0 { 0.0 } else { num / den })
}
