//! Adaptive Dormand–Prince 5(4) integration of the Kirchhoff equations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{conserved, min_separation, velocity_into, ConservedSet, VortexConfiguration, DEFAULT_COLLISION_EPS};
use crate::background::BackgroundFlow;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationControls {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// First trial step; chosen automatically when absent.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub collision_eps: f64,
    /// Times at which the trajectory is sampled, in addition to the start
    /// and end points. Must lie inside `(t0, t_end)`.
    pub output_times: Vec<f64>,
}

impl Default for IntegrationControls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            initial_step: None,
            max_step: None,
            collision_eps: DEFAULT_COLLISION_EPS,
            output_times: Vec::new(),
        }
    }
}

impl IntegrationControls {
    /// `count` equally spaced interior samples between `t0` and `t_end`.
    pub fn with_uniform_samples(mut self, t0: f64, t_end: f64, count: usize) -> Self {
        self.output_times = (1..=count).map(|k| t0 + (t_end - t0) * k as f64 / (count + 1) as f64).collect();
        self
    }

    fn validate(&self, t0: f64, t_end: f64) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol >= 0.0 && self.rtol.is_finite() && self.atol.is_finite()) {
            return Err(Error::InvalidParameter("tolerances must be positive and finite".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        if !(self.collision_eps >= 0.0) {
            return Err(Error::InvalidParameter("collision_eps must be >= 0".into()));
        }
        let mut prev = t0;
        for &t in &self.output_times {
            if !(t > prev && t < t_end) {
                return Err(Error::InvalidParameter(format!(
                    "output time {t} must be increasing inside ({t0}, {t_end})"
                )));
            }
            prev = t;
        }
        Ok(())
    }
}

/// Largest deviation of each invariant from its initial value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub impulse: f64,
    pub angular_impulse: f64,
    pub energy: f64,
}

impl DriftReport {
    fn update(&mut self, initial: &ConservedSet, now: &ConservedSet) {
        self.impulse = self.impulse.max((now.impulse - initial.impulse).norm());
        self.angular_impulse = self.angular_impulse.max((now.angular_impulse - initial.angular_impulse).abs());
        self.energy = self.energy.max((now.energy - initial.energy).abs());
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Start, requested output times, end.
    pub samples: Vec<VortexConfiguration>,
    pub initial_invariants: ConservedSet,
    pub drift: DriftReport,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &VortexConfiguration {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

// Autonomous system: the stage nodes c_i are never needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct System<'a> {
    strengths: &'a [f64],
    bg: &'a BackgroundFlow,
    eps: f64,
}

impl System<'_> {
    fn eval(&self, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        velocity_into(y, self.strengths, self.bg, self.eps, out)
    }
}

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (coef, k) in terms {
            acc += *coef * k[i];
        }
        *slot = y[i] + h * acc;
    }
}

fn error_norm(y: &[Complex64], y_new: &[Complex64], err: &[Complex64], rtol: f64, atol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..y.len() {
        for (e, a, b) in [(err[i].re, y[i].re, y_new[i].re), (err[i].im, y[i].im, y_new[i].im)] {
            let sc = atol + rtol * a.abs().max(b.abs());
            sum += (e / sc).powi(2);
        }
    }
    (sum / (2 * y.len()) as f64).sqrt()
}

/// Integrates from `cfg.t` to `t_end`, sampling at the requested times.
pub fn integrate(
    cfg: &VortexConfiguration,
    bg: &BackgroundFlow,
    t_end: f64,
    controls: &IntegrationControls,
) -> Result<Trajectory> {
    cfg.validate()?;
    bg.validate()?;
    if !(t_end.is_finite() && t_end > cfg.t) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must exceed t0 = {}", cfg.t)));
    }
    controls.validate(cfg.t, t_end)?;

    let n = cfg.len();
    let sys = System { strengths: &cfg.strengths, bg, eps: controls.collision_eps };
    let zero = Complex64::new(0.0, 0.0);
    let mut y = cfg.positions.clone();
    let mut t = cfg.t;
    let mut k1 = vec![zero; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err = vec![zero; n];
    sys.eval(&y, &mut k1)?;

    let initial_invariants = conserved(cfg);
    let mut drift = DriftReport::default();
    let mut samples = vec![cfg.clone()];
    let mut targets = controls.output_times.iter().copied().chain(std::iter::once(t_end)).peekable();

    let span = t_end - t;
    let max_step = controls.max_step.unwrap_or(span).min(span);
    let mut h = match controls.initial_step {
        Some(h0) if h0 > 0.0 => h0,
        _ => initial_step(&y, &k1, controls),
    }
    .min(max_step);

    let order_exp = 1.0 / 5.0;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut steps = 0;
    while let Some(&target) = targets.peek() {
        if steps >= controls.max_steps {
            return Err(Error::StepLimit { max_steps: controls.max_steps, t });
        }
        steps += 1;
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            let mut sep = min_separation(&y);
            for pole in bg.poles() {
                for z in &y {
                    sep = sep.min((z - pole).norm());
                }
            }
            return Err(Error::StepUnderflow { t, min_separation: sep });
        }
        let hits_target = t + h >= target;
        let step = if hits_target { target - t } else { h };

        combine(&mut stage, &y, step, &[(A21, &k1)]);
        sys.eval(&stage, &mut k2)?;
        combine(&mut stage, &y, step, &[(A31, &k1), (A32, &k2)]);
        sys.eval(&stage, &mut k3)?;
        combine(&mut stage, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        sys.eval(&stage, &mut k4)?;
        combine(&mut stage, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        sys.eval(&stage, &mut k5)?;
        combine(&mut stage, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        sys.eval(&stage, &mut k6)?;
        combine(&mut y_new, &y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        sys.eval(&y_new, &mut k7)?;
        for i in 0..n {
            err[i] = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = error_norm(&y, &y_new, &err, controls.rtol, controls.atol);

        if e <= 1.0 {
            accepted += 1;
            t = if hits_target { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            let snapshot = VortexConfiguration { positions: y.clone(), strengths: cfg.strengths.clone(), t };
            drift.update(&initial_invariants, &conserved(&snapshot));
            if hits_target {
                samples.push(snapshot);
                targets.next();
            }
            let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-order_exp)).clamp(0.2, 5.0) };
            // a step clipped to hit an output time says little about the natural size
            if !hits_target || step >= h {
                h = (h * fac).min(max_step);
            }
        } else {
            rejected += 1;
            h = step * (0.9 * e.powf(-order_exp)).clamp(0.1, 1.0);
        }
    }

    Ok(Trajectory { samples, initial_invariants, drift, accepted_steps: accepted, rejected_steps: rejected })
}

fn initial_step(y: &[Complex64], f0: &[Complex64], controls: &IntegrationControls) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(f0) {
        let sc = controls.atol + controls.rtol * yi.norm();
        d0 += (yi.norm() / sc).powi(2);
        d1 += (fi.norm() / sc).powi(2);
    }
    let (d0, d1) = (d0.sqrt(), d1.sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn corotating_pair_returns_after_one_period() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1.0).unwrap();
        let traj = integrate(&cfg, &BackgroundFlow::None, 4.0 * PI, &IntegrationControls::default()).unwrap();
        let end = traj.last();
        for (a, b) in end.positions.iter().zip(&cfg.positions) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
        assert!(traj.drift.impulse < 1e-8);
        assert!(traj.drift.angular_impulse < 1e-8);
        assert!(traj.drift.energy < 1e-8);
    }

    #[test]
    fn single_vortex_stays_put() {
        let cfg = VortexConfiguration::uniform(vec![c(0.2, -0.3)], 1.0).unwrap();
        let controls = IntegrationControls::default().with_uniform_samples(0.0, 5.0, 4);
        let traj = integrate(&cfg, &BackgroundFlow::None, 5.0, &controls).unwrap();
        assert_eq!(traj.samples.len(), 6);
        for s in &traj.samples {
            assert_eq!(s.positions, cfg.positions);
        }
    }

    #[test]
    fn equilateral_triangle_rotates_rigidly() {
        let r = 1.0;
        let pos: Vec<_> = (0..3).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / 3.0)).collect();
        let cfg = VortexConfiguration::uniform(pos, 1.0).unwrap();
        // angular velocity Γ(n-1)/(2 r²) = 1 for n = 3, so period 2π
        let controls = IntegrationControls::default().with_uniform_samples(0.0, 2.0 * PI, 7);
        let traj = integrate(&cfg, &BackgroundFlow::None, 2.0 * PI, &controls).unwrap();
        let side = 3f64.sqrt() * r;
        for s in &traj.samples {
            for i in 0..3 {
                let d = (s.positions[i] - s.positions[(i + 1) % 3]).norm();
                assert!((d - side).abs() < 1e-8);
            }
        }
        let end = traj.last();
        for (a, b) in end.positions.iter().zip(&cfg.positions) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn samples_land_on_requested_times() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1.0).unwrap();
        let controls = IntegrationControls { output_times: vec![0.5, 1.25, 2.0], ..Default::default() };
        let traj = integrate(&cfg, &BackgroundFlow::None, 3.0, &controls).unwrap();
        let times: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.5, 1.25, 2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_requests() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0)], 1.0).unwrap();
        let bg = BackgroundFlow::None;
        assert!(integrate(&cfg, &bg, 0.0, &IntegrationControls::default()).is_err());
        let bad = IntegrationControls { output_times: vec![2.0, 1.0], ..Default::default() };
        assert!(integrate(&cfg, &bg, 3.0, &bad).is_err());
    }

    #[test]
    fn step_limit_is_reported() {
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1.0).unwrap();
        let controls = IntegrationControls { max_steps: 3, ..Default::default() };
        assert!(matches!(integrate(&cfg, &BackgroundFlow::None, 100.0, &controls), Err(Error::StepLimit { .. })));
    }

    #[test]
    fn radial_sink_drives_vortex_into_pole() {
        // W = i/z is a point sink: ż = -z/|z|², reaching the origin at t = 1/2
        let cfg = VortexConfiguration::uniform(vec![c(1.0, 0.0)], 1.0).unwrap();
        let bg = BackgroundFlow::CustomRational {
            poles: vec![c(0.0, 0.0)],
            residues: vec![c(0.0, 1.0)],
            polynomial: vec![],
        };
        let res = integrate(&cfg, &bg, 1.0, &IntegrationControls::default());
        assert!(matches!(res, Err(Error::StepUnderflow { .. }) | Err(Error::Collision { .. })), "{res:?}");
    }
}
