//! Coherent drive envelopes of the lossless coupled-cavity pair.
//!
//! Under the free coupled-cavity evolution with the pump, the cavity modes are
//! displaced by `sqrt(2) E1(t)` and `sqrt(2) E2(t)` in the frame co-moving
//! with the cavity resonance:
//!
//! ```text
//! E1(t) = iE/(2 sqrt 2) [ e^{-iJt}/(Δ+J) + e^{iJt}/(Δ-J) - 2Δ e^{iΔt}/(Δ²-J²) ]
//! E2(t) = iE/sqrt 2 [ J e^{iΔt} - J cos Jt - iΔ sin Jt ] / (Δ²-J²)
//! ```
//!
//! At the resonances `Δ = ±J` (and for decoupled cavities, `J = 0`) the
//! expressions are replaced by their analytic limits.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::params::SystemParams;
use crate::types::{C64, I};

/// Relative distance `|Δ ∓ J| / J` below which the limit formulas are used.
pub const RESONANCE_THRESHOLD: f64 = 1e-6;

/// Which closed form evaluates the envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveRegime {
    Generic,
    DeltaEqJ,
    DeltaEqMinusJ,
    /// `Δ = 0`; the generic formula is regular here and is used as is.
    DeltaEqZero,
    /// `J = 0`: the second cavity is never driven.
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveEnvelope {
    e: f64,
    delta: f64,
    j: f64,
    regime: DriveRegime,
}

impl DriveEnvelope {
    pub fn new(params: &SystemParams) -> Self {
        Self::from_parts(params.e, params.delta, params.j)
    }

    pub fn from_parts(e: f64, delta: f64, j: f64) -> Self {
        let regime = if j == 0.0 {
            DriveRegime::Decoupled
        } else if (delta - j).abs() < RESONANCE_THRESHOLD * j {
            DriveRegime::DeltaEqJ
        } else if (delta + j).abs() < RESONANCE_THRESHOLD * j {
            DriveRegime::DeltaEqMinusJ
        } else if delta == 0.0 {
            DriveRegime::DeltaEqZero
        } else {
            DriveRegime::Generic
        };
        Self { e, delta, j, regime }
    }

    pub fn regime(&self) -> DriveRegime {
        self.regime
    }

    pub fn e1(&self, t: f64) -> C64 {
        let (e, j) = (self.e, self.j);
        match self.regime {
            DriveRegime::Generic | DriveRegime::DeltaEqZero => self.e1_generic(t),
            DriveRegime::DeltaEqJ => {
                let jt = j * t;
                I * e / (4.0 * SQRT_2 * j)
                    * (C64::cis(-jt) - (1.0 + 2.0 * I * jt) * C64::cis(jt))
            }
            DriveRegime::DeltaEqMinusJ => {
                let jt = j * t;
                I * e / (4.0 * SQRT_2 * j)
                    * ((1.0 - 2.0 * I * jt) * C64::cis(-jt) - C64::cis(jt))
            }
            DriveRegime::Decoupled => {
                let dt = self.delta * t;
                // (i/Δ)(1 - e^{iΔt}) written to stay regular as Δ -> 0
                if dt.abs() < 1e-4 {
                    e * t / SQRT_2 * (1.0 + 0.5 * I * dt - dt * dt / 6.0)
                } else {
                    I * e / (SQRT_2 * self.delta) * (1.0 - C64::cis(dt))
                }
            }
        }
    }

    pub fn e2(&self, t: f64) -> C64 {
        let (e, j) = (self.e, self.j);
        match self.regime {
            DriveRegime::Generic | DriveRegime::DeltaEqZero => self.e2_generic(t),
            DriveRegime::DeltaEqJ => {
                let jt = j * t;
                -e / (2.0 * SQRT_2 * j) * (jt * C64::cis(jt) - jt.sin())
            }
            DriveRegime::DeltaEqMinusJ => {
                let jt = j * t;
                e / (2.0 * SQRT_2 * j) * (jt * C64::cis(-jt) - jt.sin())
            }
            DriveRegime::Decoupled => C64::new(0.0, 0.0),
        }
    }

    /// The generic closed form, evaluated regardless of regime.
    pub fn e1_generic(&self, t: f64) -> C64 {
        let (e, d, j) = (self.e, self.delta, self.j);
        I * e / (2.0 * SQRT_2)
            * (C64::cis(-j * t) / (d + j) + C64::cis(j * t) / (d - j)
                - 2.0 * d * C64::cis(d * t) / ((d - j) * (d + j)))
    }

    pub fn e2_generic(&self, t: f64) -> C64 {
        let (e, d, j) = (self.e, self.delta, self.j);
        let denom = (d - j) * (d + j);
        I * e / SQRT_2
            * (j * C64::cis(d * t) - j * (j * t).cos() - I * d * (j * t).sin())
            / denom
    }

    /// Displacements `(E1 + E2, E1 - E2)` of the two supermodes.
    pub fn supermode_displacements(&self, t: f64) -> (C64, C64) {
        let (a, b) = (self.e1(t), self.e2(t));
        (a + b, a - b)
    }

    /// Upper bound on `|E1(t)|` for `0 <= t <= horizon`.
    pub fn e1_bound(&self, horizon: f64) -> f64 {
        let (e, d, j) = (self.e, self.delta, self.j);
        match self.regime {
            DriveRegime::Generic | DriveRegime::DeltaEqZero => {
                e / (2.0 * SQRT_2)
                    * (1.0 / (d + j).abs() + 1.0 / (d - j).abs() + 2.0 * d.abs() / (d * d - j * j).abs())
            }
            DriveRegime::DeltaEqJ | DriveRegime::DeltaEqMinusJ => {
                e / (4.0 * SQRT_2 * j) * (2.0 + 2.0 * j * horizon)
            }
            DriveRegime::Decoupled => {
                let linear = e * horizon / SQRT_2;
                if d == 0.0 {
                    linear
                } else {
                    linear.min(2.0 * e / (SQRT_2 * d.abs()))
                }
            }
        }
    }
}

pub fn drive_e1(params: &SystemParams, t: f64) -> C64 {
    DriveEnvelope::new(params).e1(t)
}

pub fn drive_e2(params: &SystemParams, t: f64) -> C64 {
    DriveEnvelope::new(params).e2(t)
}

pub fn supermode_displacements(params: &SystemParams, t: f64) -> (C64, C64) {
    DriveEnvelope::new(params).supermode_displacements(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn env(e: f64, delta: f64, j: f64) -> DriveEnvelope {
        DriveEnvelope::from_parts(e, delta, j)
    }

    #[test]
    fn envelopes_vanish_at_start() {
        for (d, j) in [(-34.2, 11.4), (0.0, 1.0), (1.0, 1.0), (-1.0, 1.0), (3.0, 0.0), (0.0, 0.0)] {
            let env = env(2.5e5, d, j);
            assert!(env.e1(0.0).norm() <= 1e-12 * 2.5e5, "{d} {j}");
            assert!(env.e2(0.0).norm() <= 1e-12 * 2.5e5, "{d} {j}");
        }
    }

    #[test]
    fn resonant_drive_reduces_to_sine() {
        let env = env(1.0, 0.0, 1.0);
        assert_eq!(env.regime(), DriveRegime::DeltaEqZero);
        let e1 = env.e1(PI / 2.0);
        assert!((e1.re - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(e1.im.abs() < 1e-14);
    }

    #[test]
    fn resonant_e2_matches_cosine_form() {
        // Δ = 0: E2 = -(iE / (sqrt2 J)) (1 - cos Jt)
        let env = env(1.0, 0.0, 1.0);
        let e2 = env.e2(PI);
        assert!((e2 - C64::new(0.0, -SQRT_2)).norm() < 1e-14);
        let near = DriveEnvelope::from_parts(1.0, 1e-8, 1.0);
        assert!((near.e2_generic(PI) - e2).norm() <= 1e-6 * e2.norm());
    }

    #[test]
    fn limit_formulas_match_numerical_limit() {
        for sign in [1.0, -1.0] {
            let limit = env(1.0, sign, 1.0);
            let near = env(1.0, sign * (1.0 + 1e-8), 1.0);
            assert_eq!(near.regime(), limit.regime());
            let (a, b) = (limit.e1(1.0), near.e1_generic(1.0));
            assert!((a - b).norm() <= 1e-6 * a.norm(), "{a} vs {b}");
            let (a, b) = (limit.e2(1.0), near.e2_generic(1.0));
            assert!((a - b).norm() <= 1e-6 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn regime_continuity_scales_with_offset() {
        let eps = 1e-6;
        for j in [0.3, 1.0, 11.4] {
            for sign in [1.0, -1.0] {
                let limit = env(1.0, sign * j, j);
                for off in [1.0 + eps, 1.0 - eps] {
                    let near = env(1.0, sign * j * off, j);
                    for t in [0.5, 2.0, 7.0] {
                        let scale = 1.0 + j * t;
                        assert!((near.e1_generic(t) - limit.e1(t)).norm() <= 10.0 * eps * scale * scale);
                        assert!((near.e2_generic(t) - limit.e2(t)).norm() <= 10.0 * eps * scale * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_cavity_drive() {
        // a1 = sqrt2 E1 solves a1' = E e^{iΔt} for J = 0.
        let env = env(2.0, 3.0, 0.0);
        let t = 0.7;
        let a1 = SQRT_2 * env.e1(t);
        let exact = 2.0 * (C64::cis(3.0 * t) - 1.0) / (I * 3.0);
        assert!((a1 - exact).norm() < 1e-14);
        assert_eq!(env.e2(t), C64::new(0.0, 0.0));
        let tiny = DriveEnvelope::from_parts(2.0, 1e-9, 0.0);
        assert!((SQRT_2 * tiny.e1(t) - C64::new(2.0 * t, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn displacements_are_sum_and_difference() {
        let env = env(1.0, 0.0, 1.0);
        let t = PI / 2.0;
        let (o1, o2) = env.supermode_displacements(t);
        assert_eq!(o1, env.e1(t) + env.e2(t));
        assert_eq!(o2, env.e1(t) - env.e2(t));
        let zero = DriveEnvelope::from_parts(0.0, -3.0, 1.0);
        assert_eq!(zero.supermode_displacements(4.2), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
    }

    #[test]
    fn bound_dominates_samples() {
        for (d, j) in [(-34.2, 11.4), (11.4, 11.4), (-0.3, 0.1), (2.0, 0.0)] {
            let env = env(2.5e5, d, j);
            let bound = env.e1_bound(27.0);
            for k in 0..=2000 {
                let t = 27.0 * k as f64 / 2000.0;
                assert!(env.e1(t).norm() <= bound * (1.0 + 1e-12));
            }
        }
    }
}
