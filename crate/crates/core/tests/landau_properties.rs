use std::f64::consts::PI;

use kirchhoff::landau::{self, ComplexGrid, Ladder, LaughlinParams};
use kirchhoff::Complex64;
use proptest::prelude::*;

fn distinct(raw: &[(f64, f64)]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for &(x, y) in raw {
        let z = Complex64::new(x, y);
        if out.iter().all(|w| (z - w).norm() > 0.2) {
            out.push(z);
        }
    }
    out
}

#[test]
fn pair_radius_for_all_exponents_and_lengths() {
    for m in [1u32, 3, 5] {
        for lb in [0.5, 1.0, 2.0] {
            let p = LaughlinParams::new(2, m, lb).unwrap();
            let guess = [Complex64::new(0.7 * lb, 0.2), Complex64::new(-0.3, -1.1 * lb)];
            let eq = landau::solve_planar_equilibrium(&p, &guess, 1e-10, 100).unwrap();
            let expect = lb * (2.0 * m as f64).sqrt();
            for r in eq.radii() {
                assert!((r - expect).abs() < 1e-10, "m={m} lB={lb}: {r} vs {expect}");
            }
        }
    }
}

#[test]
fn polygon_equilibria() {
    for n in 3..=6 {
        let p = LaughlinParams::new(n, 1, 1.0).unwrap();
        let r = p.polygon_radius();
        let guess: Vec<Complex64> = (0..n)
            .map(|k| {
                Complex64::from_polar(
                    r * (1.0 + 0.05 * (k as f64).sin()),
                    2.0 * PI * k as f64 / n as f64 + 0.03 * k as f64,
                )
            })
            .collect();
        let eq = landau::solve_planar_equilibrium(&p, &guess, 1e-10, 200).unwrap();
        assert!(eq.residual_inf <= 1e-10);
    }
}

#[test]
fn lowering_annihilates_both_lll_states_at_second_order() {
    let lb = 1.0;
    let states: [fn(Complex64) -> Complex64; 2] =
        [|z| Complex64::new((-z.norm_sqr() / 4.0).exp(), 0.0), |z| z * (-z.norm_sqr() / 4.0).exp()];
    for psi in states {
        let norms: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| {
                let n = (20.0 / h) as usize + 1;
                let g = ComplexGrid::centered(n, h, psi);
                landau::ladder_apply(&g, Ladder::Lower, lb).unwrap().norm() / g.norm()
            })
            .collect();
        for w in norms.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
        }
    }
}

#[test]
fn commutator_converges_to_one() {
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let n = (16.0 / h) as usize + 1;
            let g = ComplexGrid::centered(n, h, |z| Complex64::new((-z.norm_sqr() / 4.0).exp(), 0.0));
            (landau::commutator_expectation(&g, 1.0).unwrap() - 1.0).norm()
        })
        .collect();
    assert!(errs[2] < errs[1] && errs[1] < errs[0]);
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_covariance(
        raw in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8),
        theta in 0.0f64..std::f64::consts::TAU,
        m in prop_oneof![Just(1u32), Just(3), Just(5)],
        lb in 0.3f64..2.0,
    ) {
        let z = distinct(&raw);
        let p = LaughlinParams::new(z.len(), m, lb).unwrap();
        let s = landau::laughlin_stationarity_residual(&z, &p).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let zr: Vec<_> = z.iter().map(|v| rot * v).collect();
        let sr = landau::laughlin_stationarity_residual(&zr, &p).unwrap();
        for (a, b) in sr.iter().zip(&s) {
            prop_assert!((a - b * rot.conj()).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn residual_is_wirtinger_gradient(
        raw in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..7),
        lb in 0.5f64..2.0,
    ) {
        let z = distinct(&raw);
        let p = LaughlinParams::new(z.len(), 3, lb).unwrap();
        let s = landau::laughlin_stationarity_residual(&z, &p).unwrap();
        let h = 1e-6;
        // Real part only: branch-free, and ∂_{z_j} Re L = (S_j + conj(∂_{z̄_j} L))/2 with
        // ∂_{z̄_j} L = -z_j/(4 l_B²) from the Gaussian alone.
        for j in 0..z.len() {
            let re = |dz: Complex64| {
                let mut w = z.clone();
                w[j] += dz;
                landau::log_laughlin(&w, &p).unwrap().re
            };
            let gx = (re(Complex64::new(h, 0.0)) - re(Complex64::new(-h, 0.0))) / (2.0 * h);
            let gy = (re(Complex64::new(0.0, h)) - re(Complex64::new(0.0, -h))) / (2.0 * h);
            let d_re = 0.5 * Complex64::new(gx, -gy);
            let expect = 0.5 * (s[j] + (-z[j] * p.omega()).conj());
            prop_assert!((d_re - expect).norm() < 1e-6 * expect.norm().max(1.0), "{} vs {}", d_re, expect);
        }
    }
}
