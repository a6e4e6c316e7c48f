//! Size of the first-order corrections neglected when the cubic
//! optomechanical term is factored out of the supermode evolution.

use crate::params::SystemParams;

/// Bound above which results are reported with a validity warning.
pub const VALIDITY_WARN_THRESHOLD: f64 = 1e-2;

/// Largest first-order correction coefficient over `[0, horizon]`.
///
/// The corrections carry the factors `g_m/ω_m`, `g_m/|2J - ω_m|` and
/// `g_m/(2J + ω_m)`. Each comes from `(e^{-iνt} - e^{-iντ})/ν`, whose modulus
/// never exceeds `|t - τ|`, so near the resonance `ω_m = 2J` the
/// difference-frequency term is replaced by the secular bound
/// `g_m · horizon` once `|2J - ω_m| < 1/horizon`.
pub fn approximation_bound(params: &SystemParams, horizon: f64) -> f64 {
    assert!(horizon > 0.0, "horizon must be positive");
    let g_m = params.g_m;
    if g_m == 0.0 {
        return 0.0;
    }
    let detuning = (2.0 * params.j - params.omega_m).abs();
    let difference = if detuning < 1.0 / horizon {
        g_m * horizon
    } else {
        g_m / detuning
    };
    let mechanical = g_m / params.omega_m;
    let sum = g_m / (2.0 * params.j + params.omega_m);
    mechanical.max(difference).max(sum)
}

pub fn is_valid(bound: f64) -> bool {
    bound <= VALIDITY_WARN_THRESHOLD
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn with(g_m: f64, omega_m: f64, j: f64) -> SystemParams {
        SystemParams { g_m, omega_m, j, ..SystemParams::blue_detuned_reference(0.5) }
    }

    #[test]
    fn resonant_reference_uses_secular_bound() {
        let b = approximation_bound(&with(5e-5, 22.8, 11.4), 27.0);
        assert!((b - 1.35e-3).abs() < 1e-15);
        assert!(is_valid(b));
    }

    #[test]
    fn zero_coupling_gives_zero() {
        assert_eq!(approximation_bound(&with(0.0, 22.8, 11.4), 27.0), 0.0);
    }

    #[test]
    fn off_resonant_difference_term() {
        // 2J - ω_m = 2 > 1/horizon
        let b = approximation_bound(&with(1e-4, 10.0, 6.0), 10.0);
        assert!((b - 5e-5).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn monotone_in_coupling_and_horizon(
            g_m in 0.0..1e-3f64, dg in 0.0..1e-3f64,
            omega_m in 0.1..50.0f64, j in 0.0..30.0f64,
            horizon in 0.01..100.0f64, dh in 0.0..100.0f64,
        ) {
            let p = with(g_m, omega_m, j);
            let b = approximation_bound(&p, horizon);
            prop_assert!(approximation_bound(&with(g_m + dg, omega_m, j), horizon) >= b);
            prop_assert!(approximation_bound(&p, horizon + dh) >= b);
        }
    }
}
