//! Coefficients of the six-operator linear Langevin system
//!
//! ```text
//! d/dt v = M(t) v + λ(t) + n(t),    v = (o1, o1†, o2, o2†, b, b†)
//! ```
//!
//! written in the interaction picture of the driven coupled-cavity
//! Hamiltonian, together with the diffusion matrix `D(t)` of the noise
//! vector (`<n_j(t) n_k(t')> = D_jk(t) δ(t - t')`) and the second moments of
//! the initial state (cavity vacuum times a thermal mechanical state).
//!
//! Every coefficient obeys the conjugation symmetry `S X S = conj(X)` where
//! `S` swaps each operator with its adjoint, so the odd rows are filled from
//! the even ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::drive::DriveEnvelope;
use crate::error::Error;
use crate::params::SystemParams;
use crate::types::{idx, partner, Mat6, Vec6, C64, I, ZERO};

/// Which noise cross-correlations enter the diffusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Only the same-operator pairs `<n_i n_i†>`, `<n_i† n_i>`.
    #[default]
    #[serde(alias = "paper_literal")]
    Diagonal,
    /// Adds the optical cross-channel pairs `<n_1 n_2†>` etc., which oscillate
    /// as `e^{±2iJt}`.
    Full,
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "diagonal" | "paper_literal" => Ok(Self::Diagonal),
            "full" => Ok(Self::Full),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Diagonal => "diagonal",
            Self::Full => "full",
        })
    }
}

/// Sign of the dissipative supermode terms.
///
/// The supermode equations as usually written carry `+(g+γ)/2` on the
/// inter-supermode coupling and `+(γE1 ∓ gE2)` on the coherent drive. Starting
/// from the single-cavity equations (`a1' = -γ a1 + ...`, `a2' = g a2 + ...`)
/// with `o_{1,2} = (a1 ± a2)/sqrt2` gives the opposite sign on those terms and
/// on the `√γ` part of `n_2`. `Reference` is the default and is what the
/// scenario outputs use; `CavityDerived` reproduces the bare driven-damped
/// cavity exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    Reference,
    CavityDerived,
}

impl SignConvention {
    fn sign(self) -> f64 {
        match self {
            Self::Reference => 1.0,
            Self::CavityDerived => -1.0,
        }
    }
}

impl FromStr for SignConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "reference" => Ok(Self::Reference),
            "cavity_derived" => Ok(Self::CavityDerived),
            other => Err(Error::UnknownVariant { kind: "sign convention", value: other.to_string() }),
        }
    }
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Reference => "reference",
            Self::CavityDerived => "cavity_derived",
        })
    }
}

/// Diffusion matrix split by physical noise source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionChannels {
    /// Dissipation (`γ`) and amplification (`g`) noise of the cavities.
    pub optical: Mat6,
    /// Mechanical bath term `<n_3 n_3†> = 2γ_m (n_th + 1)`.
    pub thermal_np1: Mat6,
    /// Mechanical bath term `<n_3† n_3> = 2γ_m n_th`.
    pub thermal_n: Mat6,
}

impl DiffusionChannels {
    pub fn total(&self) -> Mat6 {
        self.optical + self.thermal_np1 + self.thermal_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    params: SystemParams,
    drive: DriveEnvelope,
    noise_mode: NoiseMode,
    signs: SignConvention,
}

impl LinearSystem {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            params: *params,
            drive: DriveEnvelope::new(params),
            noise_mode: NoiseMode::default(),
            signs: SignConvention::default(),
        }
    }

    pub fn with_noise_mode(mut self, mode: NoiseMode) -> Self {
        self.noise_mode = mode;
        self
    }

    pub fn with_signs(mut self, signs: SignConvention) -> Self {
        self.signs = signs;
        self
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn drive(&self) -> &DriveEnvelope {
        &self.drive
    }

    pub fn noise_mode(&self) -> NoiseMode {
        self.noise_mode
    }

    pub fn signs(&self) -> SignConvention {
        self.signs
    }

    /// `M(t)`.
    pub fn dynamical_matrix(&self, t: f64) -> Mat6 {
        let p = &self.params;
        let e1 = self.drive.e1(t);
        let gm = I * p.g_m;
        let pj = C64::cis(p.j * t);
        let pm = C64::cis(p.omega_m * t);
        let damp = C64::from(0.5 * (p.g - p.gamma));
        let cross = 0.5 * (p.g + p.gamma) * self.signs.sign();

        let mut m = Mat6::zeros();
        m[(idx::O1, idx::O1)] = damp;
        m[(idx::O1, idx::O2)] = cross * C64::cis(2.0 * p.j * t);
        m[(idx::O1, idx::B)] = gm * e1 * pj * pm.conj();
        m[(idx::O1, idx::B_DAG)] = gm * e1 * pj * pm;

        m[(idx::O2, idx::O1)] = cross * C64::cis(-2.0 * p.j * t);
        m[(idx::O2, idx::O2)] = damp;
        m[(idx::O2, idx::B)] = gm * e1 * pj.conj() * pm.conj();
        m[(idx::O2, idx::B_DAG)] = gm * e1 * pj.conj() * pm;

        m[(idx::B, idx::O1)] = gm * e1.conj() * pm * pj.conj();
        m[(idx::B, idx::O2)] = gm * e1.conj() * pm * pj;
        m[(idx::B, idx::O1_DAG)] = gm * e1 * pm * pj;
        m[(idx::B, idx::O2_DAG)] = gm * e1 * pm * pj.conj();
        m[(idx::B, idx::B)] = C64::from(-p.gamma_m);

        fill_conjugate_rows(&mut m);
        m
    }

    /// Coherent drive `λ(t)`.
    pub fn drive_vector(&self, t: f64) -> Vec6 {
        let p = &self.params;
        let (e1, e2) = (self.drive.e1(t), self.drive.e2(t));
        let s = self.signs.sign();
        let l1 = s * (p.gamma * e1 - p.g * e2) * C64::cis(p.j * t);
        let l2 = s * (p.gamma * e1 + p.g * e2) * C64::cis(-p.j * t);
        let l3 = 2.0 * I * p.g_m * e1.norm_sqr() * C64::cis(p.omega_m * t);
        Vec6::new(l1, l1.conj(), l2, l2.conj(), l3, l3.conj())
    }

    /// Diffusion matrix `D(t)` for the configured noise mode.
    pub fn diffusion_matrix(&self, t: f64) -> Mat6 {
        self.diffusion_channels(t).total()
    }

    pub fn diffusion_channels(&self, t: f64) -> DiffusionChannels {
        let p = &self.params;
        let mut optical = Mat6::zeros();
        optical[(idx::O1, idx::O1_DAG)] = C64::from(p.gamma);
        optical[(idx::O1_DAG, idx::O1)] = C64::from(p.g);
        optical[(idx::O2, idx::O2_DAG)] = C64::from(p.gamma);
        optical[(idx::O2_DAG, idx::O2)] = C64::from(p.g);
        if self.noise_mode == NoiseMode::Full {
            let s = self.signs.sign();
            let ph = C64::cis(2.0 * p.j * t);
            optical[(idx::O1, idx::O2_DAG)] = -s * p.gamma * ph;
            optical[(idx::O2_DAG, idx::O1)] = s * p.g * ph;
            optical[(idx::O1_DAG, idx::O2)] = s * p.g * ph.conj();
            optical[(idx::O2, idx::O1_DAG)] = -s * p.gamma * ph.conj();
        }
        let mut thermal_np1 = Mat6::zeros();
        thermal_np1[(idx::B, idx::B_DAG)] = C64::from(2.0 * p.gamma_m * (p.n_th + 1.0));
        let mut thermal_n = Mat6::zeros();
        thermal_n[(idx::B_DAG, idx::B)] = C64::from(2.0 * p.gamma_m * p.n_th);
        DiffusionChannels { optical, thermal_np1, thermal_n }
    }

    /// Second moments `<v_j v_k>` of the initial state.
    pub fn sigma0(&self) -> Mat6 {
        initial_moments(self.params.n_th)
    }
}

/// `<v_j v_k>(0)` for the cavity vacuum and a thermal mechanical state.
pub fn initial_moments(n_th: f64) -> Mat6 {
    let mut s = Mat6::zeros();
    s[(idx::O1, idx::O1_DAG)] = C64::from(1.0);
    s[(idx::O2, idx::O2_DAG)] = C64::from(1.0);
    s[(idx::B, idx::B_DAG)] = C64::from(n_th + 1.0);
    s[(idx::B_DAG, idx::B)] = C64::from(n_th);
    s
}

fn fill_conjugate_rows(m: &mut Mat6) {
    for r in [idx::O1, idx::O2, idx::B] {
        for c in 0..6 {
            let z = m[(r, c)];
            m[(partner(r), partner(c))] = if z == ZERO { ZERO } else { z.conj() };
        }
    }
}
