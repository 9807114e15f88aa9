use std::f64::consts::PI;

use kirchhoff::paraxial::{
    self, beam_width, find_vortices, lg_mode, paraxial_validity, propagate, topological_charge, BeamField, ChargeLoop,
    GridSpec, LGModeSpec,
};
use kirchhoff::Complex64;
use proptest::prelude::*;

/// Closed-form `|LG_{0,ℓ}|²` at distance `z` from the waist, unit power.
fn lg0_intensity(ell: i32, w0: f64, k: f64, z: f64, x: f64, y: f64) -> f64 {
    let zr = 0.5 * k * w0 * w0;
    let w = w0 * (1.0 + (z / zr).powi(2)).sqrt();
    let r2 = x * x + y * y;
    let l = ell.unsigned_abs() as i32;
    let fact: f64 = (1..=l).map(f64::from).product();
    let norm = 2.0 / (PI * fact) / (w * w);
    norm * (2.0 * r2 / (w * w)).powi(l) * (-2.0 * r2 / (w * w)).exp()
}

fn waist_grid() -> (GridSpec, f64) {
    // kw0 = 50, 256², waist resolved by 25.6 samples, window 10 w0.
    let w0 = 1.0;
    (GridSpec::square(256, 10.0 * w0 / 256.0, 50.0), w0)
}

#[test]
fn gaussian_width_at_rayleigh_range() {
    let (g, w0) = waist_grid();
    let spec = LGModeSpec { p: 0, ell: 0, w0 };
    let f = lg_mode(&spec, &g).unwrap();
    let (wx, wy) = beam_width(&f);
    assert!((wx / w0 - 1.0).abs() < 1e-6 && (wy / w0 - 1.0).abs() < 1e-6);
    let zr = spec.rayleigh_range(g.k);
    let steps = 10;
    let mut cur = f.clone();
    for _ in 0..steps {
        let next = propagate(&cur, zr / steps as f64, 1).unwrap();
        assert!((next.energy() - cur.energy()).abs() < 1e-10);
        cur = next;
    }
    let (wx, wy) = beam_width(&cur);
    let target = w0 * 2f64.sqrt();
    assert!((wx / target - 1.0).abs() < 5e-3, "{wx}");
    assert!((wy / target - 1.0).abs() < 5e-3, "{wy}");
}

#[test]
fn lg_intensity_is_self_similar() {
    let (g, w0) = waist_grid();
    let spec = LGModeSpec { p: 0, ell: 1, w0 };
    let f = lg_mode(&spec, &g).unwrap();
    for frac in [0.5, 1.0] {
        let z = frac * spec.rayleigh_range(g.k);
        let u = propagate(&f, z, 1).unwrap();
        let (mut se, mut peak) = (0.0f64, 0.0f64);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let expect = lg0_intensity(1, w0, g.k, z, g.x(ix), g.y(iy));
                se += (u.at(ix, iy).norm_sqr() - expect).powi(2);
                peak = peak.max(expect);
            }
        }
        let rms = (se / (g.nx * g.ny) as f64).sqrt() / peak;
        assert!(rms < 0.01, "z = {z}: rms {rms}");
    }
}

#[test]
fn lg_normalization_matches_closed_form_profile() {
    let (g, w0) = waist_grid();
    for ell in -3..=3 {
        let f = lg_mode(&LGModeSpec { p: 0, ell, w0 }, &g).unwrap();
        assert!((f.energy() - 1.0).abs() < 1e-8);
        let (ix, iy) = (140, 131);
        let expect = lg0_intensity(ell, w0, g.k, 0.0, g.x(ix), g.y(iy));
        assert!((f.at(ix, iy).norm_sqr() / expect - 1.0).abs() < 1e-8);
    }
}

#[test]
fn charges_of_lg_modes_are_exact() {
    let (g, w0) = waist_grid();
    for ell in -3..=3 {
        let f = lg_mode(&LGModeSpec { p: 0, ell, w0 }, &g).unwrap();
        let radius = w0 / g.dx;
        for r in [radius, 0.5 * radius, 2.0 * radius] {
            assert_eq!(topological_charge(&f, &ChargeLoop::centered(&f, r)).unwrap(), ell as i64);
        }
        let rotated = BeamField {
            amplitude: f.amplitude.iter().map(|v| v * Complex64::from_polar(1.0, 2.1)).collect(),
            ..f.clone()
        };
        assert_eq!(topological_charge(&rotated, &ChargeLoop::centered(&f, radius)).unwrap(), ell as i64);
        let found = find_vortices(&f);
        assert_eq!(found.iter().map(|v| v.charge).sum::<i64>(), ell as i64, "{ell}: {found:?}");
    }
}

#[test]
fn detected_charge_is_conserved_across_slices() {
    let (g, w0) = waist_grid();
    for ell in -3..=3 {
        let spec = LGModeSpec { p: 0, ell, w0 };
        let mut f = lg_mode(&spec, &g).unwrap();
        let dz = spec.rayleigh_range(g.k) / 10.0;
        for _ in 0..12 {
            f = propagate(&f, dz, 1).unwrap();
            let total: i64 = find_vortices(&f).iter().map(|v| v.charge).sum();
            assert_eq!(total, ell as i64, "ell {ell} at z {}", f.z);
        }
    }
}

#[test]
fn two_imprinted_vortices() {
    let g = GridSpec::square(128, 0.1, 30.0);
    let a = 1.5;
    let host = BeamField::from_fn(&g, 0.0, |x, y| {
        let z = Complex64::new(x, y);
        (z - a) * (z + a) * (-(x * x + y * y) / 9.0).exp()
    })
    .unwrap();
    let mut v = find_vortices(&host);
    v.sort_by(|p, q| p.x.total_cmp(&q.x));
    assert_eq!(v.len(), 2, "{v:?}");
    assert_eq!((v[0].charge, v[1].charge), (1, 1));
    assert!((v[0].x + a).abs() < 0.05 && (v[1].x - a).abs() < 0.05);
    assert!(v[0].y.abs() < 0.05 && v[1].y.abs() < 0.05);

    let mut f = host;
    for _ in 0..10 {
        f = propagate(&f, 0.5, 1).unwrap();
        assert_eq!(find_vortices(&f).iter().map(|v| v.charge).sum::<i64>(), 2);
    }
}

#[test]
fn validity_ratio_scales_with_inverse_square_of_kw0() {
    let w0 = 1.0;
    let mut ratios = Vec::new();
    for k in [100.0, 5.0] {
        let g = GridSpec::square(128, 10.0 * w0 / 128.0, k);
        let spec = LGModeSpec { p: 0, ell: 0, w0 };
        let f = lg_mode(&spec, &g).unwrap();
        ratios.push(paraxial_validity(&f, 1e-2 * spec.rayleigh_range(k)).unwrap());
    }
    assert!(ratios[0] < 1e-3);
    let gain = ratios[1] / ratios[0];
    assert!(gain > 200.0 && gain < 800.0, "gain {gain}");
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let (g, w0) = waist_grid();
    let f = lg_mode(&LGModeSpec { p: 1, ell: 2, w0 }, &g).unwrap();
    let a = paraxial::io::field_to_bytes(&propagate(&f, 3.0, 2).unwrap());
    let b = paraxial::io::field_to_bytes(&propagate(&f, 3.0, 2).unwrap());
    assert_eq!(a, b);
}

fn random_field(seed: &[f64]) -> BeamField {
    let g = GridSpec::square(16, 0.5, 4.0);
    let amplitude = (0..256)
        .map(|i| {
            let s = seed[i % seed.len()];
            Complex64::new((s * (i + 1) as f64).sin(), (s * (i + 3) as f64).cos())
        })
        .collect();
    BeamField::new(g.nx, g.ny, g.dx, g.dy, g.k, 0.0, amplitude).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_is_linear_unitary_and_reversible(
        s1 in proptest::collection::vec(0.1f64..3.0, 5),
        s2 in proptest::collection::vec(0.1f64..3.0, 5),
        alpha in (-2.0f64..2.0, -2.0f64..2.0),
        dz in 0.01f64..5.0,
    ) {
        let u = random_field(&s1);
        let v = random_field(&s2);
        let alpha = Complex64::new(alpha.0, alpha.1);
        let mix = BeamField { amplitude: u.amplitude.iter().zip(&v.amplitude).map(|(a, b)| alpha * a + b).collect(), ..u.clone() };
        let pu = propagate(&u, dz, 1).unwrap();
        let pv = propagate(&v, dz, 1).unwrap();
        let pm = propagate(&mix, dz, 1).unwrap();
        for i in 0..pm.amplitude.len() {
            prop_assert!((pm.amplitude[i] - (alpha * pu.amplitude[i] + pv.amplitude[i])).norm() < 1e-12);
        }
        prop_assert!((pu.energy() - u.energy()).abs() < 1e-10 * u.energy().max(1.0));
        let back = propagate(&pu, -dz, 1).unwrap();
        for (a, b) in back.amplitude.iter().zip(&u.amplitude) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
