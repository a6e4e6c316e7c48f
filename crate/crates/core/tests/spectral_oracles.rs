use proptest::prelude::*;
use supermode::spectral::{numerical_eigenvalues, pt_eigenvalues, PtRegime};
use supermode::{classical_response, mode_overlap, pt_eigensystem, SystemParams, C64};

fn pair(gamma: f64, g: f64, j: f64) -> SystemParams {
    SystemParams { gamma, g, j, e: 1.0, ..SystemParams::blue_detuned_reference(g) }
}

fn scan(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn splitting_above_the_exceptional_point() {
    let w = pt_eigenvalues(&pair(1.0, 0.5, 2.0));
    let split = w[1] - w[0];
    assert!((split.re - 2.0 * (4.0f64 - 0.5625).sqrt()).abs() < 1e-14);
    assert!((split.re - 2.0 * 1.85405).abs() < 1e-5);
    assert!(split.im.abs() < 1e-15);
    let num = numerical_eigenvalues(&pair(1.0, 0.5, 2.0));
    assert!((num[0] - w[0]).norm() < 1e-12 && (num[1] - w[1]).norm() < 1e-12);
}

#[test]
fn broken_regime_splits_imaginary_parts() {
    let p = pair(1.0, 0.5, 0.3);
    let es = pt_eigensystem(&p);
    assert_eq!(es.regime, PtRegime::Broken);
    let r = (0.75f64 * 0.75 - 0.09).sqrt();
    assert!((es.eigenvalues[0] - C64::new(0.0, -0.25 - r)).norm() < 1e-15);
    assert!((es.eigenvalues[1] - C64::new(0.0, -0.25 + r)).norm() < 1e-15);
}

#[test]
fn overlap_limits() {
    // weak non-orthogonality far above the exceptional point
    let p = pair(1.0, 0.5, 200.0);
    let ov = mode_overlap(&p).unwrap().norm();
    assert!((ov - 1.5 / 400.0).abs() < 1e-12);
    // coalescing modes just above it
    let p = pair(1.0, 0.5, 0.75 * (1.0 + 1e-8));
    assert!((mode_overlap(&p).unwrap().norm() - 1.0).abs() < 1e-6);
}

#[test]
fn passive_response_is_a_lorentzian_pair() {
    let p = pair(1.0, -1.0, 3.0);
    let deltas = scan(-8.0, 8.0, 16001);
    let r = classical_response(&p, &deltas, 50.0);
    assert!(!r.unstable);
    for (d, y) in deltas.iter().zip(&r.response) {
        let exact = (p.e * p.j).powi(2) / ((1.0 + (d - p.j).powi(2)) * (1.0 + (d + p.j).powi(2)));
        assert!((y - exact).abs() <= 1e-12 * exact);
    }
    // maxima of the product of the two Lorentzians sit at ±√(J² - γ²)
    let peaks = r.peak_positions();
    assert_eq!(peaks.len(), 2);
    let expected = (p.j * p.j - 1.0).sqrt();
    assert!((peaks[0] + expected).abs() <= 1e-3 && (peaks[1] - expected).abs() <= 1e-3, "{peaks:?}");
}

#[test]
fn peak_count_tracks_the_regime() {
    let deltas = scan(-10.0, 10.0, 4001);
    let unbroken = classical_response(&pair(1.0, -0.9, 3.0), &deltas, 100.0);
    assert_eq!(unbroken.peak_count(), 2);
    let broken = classical_response(&pair(1.0, -0.5, 0.1), &deltas, 100.0);
    assert_eq!(broken.peak_count(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn overlap_modulus_is_the_gain_loss_ratio(gamma in 0.1f64..3.0, g_frac in -1.0f64..1.0, excess in 1.01f64..50.0) {
        let g = g_frac * gamma;
        let j = excess * 0.5 * (g + gamma);
        prop_assume!(j > 1e-6);
        let ov = mode_overlap(&pair(gamma, g, j)).unwrap().norm();
        prop_assert!((ov - (g + gamma) / (2.0 * j)).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_eigenvalues_are_eigenvalues(gamma in 0.1f64..3.0, g in -0.1f64..3.0, j in 0.0f64..5.0) {
        let p = pair(gamma, g.max(-gamma), j);
        let (w, num) = (pt_eigenvalues(&p), numerical_eigenvalues(&p));
        let mut w = w.to_vec();
        w.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let gap = (w[1] - w[0]).norm();
        prop_assume!(gap > 1e-3);
        prop_assert!((w[0] - num[0]).norm() <= 1e-12 * (1.0 + w[0].norm()));
        prop_assert!((w[1] - num[1]).norm() <= 1e-12 * (1.0 + w[1].norm()));
    }
}
