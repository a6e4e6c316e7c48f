//! Physical parameters of the coupled active-passive resonator pair.
//!
//! All rates and frequencies are expressed in units of the passive cavity
//! loss rate `gamma`, which is normally fixed to 1. The cavity resonance
//! frequency never enters: it drops out of the co-moving frame and out of
//! every delta-correlated noise moment, so it is not a field here.
//!
//! The pump amplitude `e` is real and nonnegative. A complex pump phase only
//! rotates every drive term together and is not modelled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling strength `g_m / omega_m` above which the weak-coupling
/// factorization is no longer trusted.
pub const WEAK_COUPLING_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Passive cavity loss rate (reference unit).
    pub gamma: f64,
    /// Gain rate of the active cavity; `g = -gamma` is the passive-passive setup.
    pub g: f64,
    /// Mechanical damping rate.
    pub gamma_m: f64,
    /// Mechanical frequency.
    pub omega_m: f64,
    /// Inter-cavity coupling.
    pub j: f64,
    /// Single-photon optomechanical coupling.
    pub g_m: f64,
    /// Pump amplitude.
    pub e: f64,
    /// Pump detuning `omega_c - omega_L`.
    pub delta: f64,
    /// Mean occupation of the mechanical bath.
    pub n_th: f64,
}

/// Soft diagnostics attached to an accepted parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParamFlags {
    /// `g == -gamma`: both cavities are lossy with equal rates.
    pub passive: bool,
    /// `g_m / omega_m` exceeds [`WEAK_COUPLING_LIMIT`].
    pub strong_coupling: bool,
}

impl SystemParams {
    /// Parameters of the blue-detuned optimal setting used for the
    /// population-inversion runs: `omega_m = 2J`, `Delta = -3J`.
    pub fn blue_detuned_reference(g: f64) -> Self {
        let omega_m = 22.8;
        let j = omega_m / 2.0;
        Self {
            gamma: 1.0,
            g,
            gamma_m: 0.037,
            omega_m,
            j,
            g_m: 5e-5,
            e: 2.5e5,
            delta: -3.0 * j,
            n_th: 2.4e5,
        }
    }

    /// Checks every invariant and returns the accepted parameters together
    /// with non-fatal flags. A strong-coupling flag is also logged.
    pub fn validate(self) -> Result<(Self, ParamFlags)> {
        let fields = [
            ("gamma", self.gamma),
            ("g", self.g),
            ("gamma_m", self.gamma_m),
            ("omega_m", self.omega_m),
            ("J", self.j),
            ("g_m", self.g_m),
            ("E", self.e),
            ("Delta", self.delta),
            ("n_th", self.n_th),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { name });
        }
        for (name, value) in [
            ("gamma", self.gamma),
            ("gamma_m", self.gamma_m),
            ("omega_m", self.omega_m),
        ] {
            if value <= 0.0 {
                return Err(Error::NonPositiveRate { name, value });
            }
        }
        for (name, value) in [("J", self.j), ("g_m", self.g_m), ("E", self.e), ("n_th", self.n_th)] {
            if value < 0.0 {
                return Err(Error::NegativeQuantity { name, value });
            }
        }
        if self.g < -self.gamma {
            return Err(Error::GainBelowPassive { g: self.g, limit: -self.gamma });
        }

        let flags = ParamFlags {
            passive: self.g == -self.gamma,
            strong_coupling: self.g_m / self.omega_m > WEAK_COUPLING_LIMIT,
        };
        if flags.strong_coupling {
            log::warn!(
                "g_m/omega_m = {:.3e} lies outside the weak-coupling regime",
                self.g_m / self.omega_m
            );
        }
        Ok((self, flags))
    }

    /// Largest rate among the frequencies that appear as phase factors or
    /// damping in the linear system.
    pub fn fastest_rate(&self) -> f64 {
        [
            self.omega_m,
            2.0 * self.j,
            self.delta.abs() + self.j,
            self.gamma,
            self.g.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Exceptional-point coupling `(g + gamma) / 2`.
    pub fn exceptional_coupling(&self) -> f64 {
        0.5 * (self.g + self.gamma)
    }

    pub fn lifetime(&self) -> f64 {
        1.0 / self.gamma_m
    }
}
