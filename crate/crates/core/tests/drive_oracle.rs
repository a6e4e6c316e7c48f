//! Pump envelopes against a direct integration of the lossless driven pair
//! `x1' = -iJ x2 + E e^{iΔt}`, `x2' = -iJ x1`, for which `E1 = x1/√2` and
//! `E2 = x2/√2`.

use std::f64::consts::SQRT_2;

use proptest::prelude::*;
use supermode::drive::DriveEnvelope;
use supermode::C64;

fn integrate_pair(e: f64, delta: f64, j: f64, t_end: f64, n: usize) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let f = |t: f64, x: [C64; 2]| [-i * j * x[1] + e * (i * delta * t).exp(), -i * j * x[0]];
    let h = t_end / n as f64;
    let mut x = [C64::new(0.0, 0.0); 2];
    let add = |x: [C64; 2], k: [C64; 2], s: f64| [x[0] + k[0] * s, x[1] + k[1] * s];
    for step in 0..n {
        let t = step as f64 * h;
        let k1 = f(t, x);
        let k2 = f(t + 0.5 * h, add(x, k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, add(x, k2, 0.5 * h));
        let k4 = f(t + h, add(x, k3, h));
        x = [
            x[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
            x[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
        ];
    }
    (x[0] / SQRT_2, x[1] / SQRT_2)
}

fn check(e: f64, delta: f64, j: f64, t: f64) {
    let env = DriveEnvelope::from_parts(e, delta, j);
    let (e1, e2) = integrate_pair(e, delta, j, t, 20_000);
    let scale = e1.norm().max(e2.norm()).max(e * t * 1e-3);
    assert!((env.e1(t) - e1).norm() <= 1e-10 * scale, "E1 {delta} {j}: {} vs {e1}", env.e1(t));
    assert!((env.e2(t) - e2).norm() <= 1e-10 * scale, "E2 {delta} {j}: {} vs {e2}", env.e2(t));
}

#[test]
fn generic_detuning() {
    check(1.0, 3.0, 1.0, 1.0);
    check(2.5e5, -34.2, 11.4, 0.4);
}

#[test]
fn resonant_detunings() {
    check(1.0, 1.0, 1.0, 2.0);
    check(1.0, -1.0, 1.0, 2.0);
    check(1.0, 0.0, 1.0, 2.0);
}

#[test]
fn uncoupled_cavities() {
    check(1.0, 0.0, 0.0, 1.5);
    check(1.0, 2.0, 0.0, 1.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelopes_follow_the_driven_pair(delta in -5.0f64..5.0, j in 0.1f64..3.0, t in 0.1f64..3.0) {
        check(1.0, delta, j, t);
    }

    #[test]
    fn envelopes_are_linear_in_the_pump(e in 0.0f64..1e6, t in 0.0f64..30.0) {
        let unit = DriveEnvelope::from_parts(1.0, -34.2, 11.4);
        let env = DriveEnvelope::from_parts(e, -34.2, 11.4);
        prop_assert!((env.e1(t) - unit.e1(t) * e).norm() <= 1e-12 * e.max(1.0));
        prop_assert!((env.e2(t) - unit.e2(t) * e).norm() <= 1e-12 * e.max(1.0));
    }
}
