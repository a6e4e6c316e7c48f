//! Mean and second-moment evolution of the linear Langevin system.
//!
//! With `m = <v>` and `Σ_jk = <v_j v_k> - m_j m_k`,
//!
//! ```text
//! m' = M m + λ
//! Σ' = M Σ + Σ Mᵀ + D
//! ```
//!
//! The transpose (not the adjoint) appears because the adjoint operators are
//! explicit components of `v`. This carries the same information as the
//! propagator integrals but never inverts `P(τ)`, so it stays usable where
//! the product path is ill-conditioned. The covariance is linear in its
//! sources and is evolved per source so populations can be split afterwards.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linear::LinearSystem;
use crate::propagator::overflowed;
use crate::types::{max_abs, Mat6, Vec6, C64};

/// Source channels of the covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Homogeneous evolution of the initial second moments.
    Initial = 0,
    /// Cavity dissipation and amplification noise.
    Optical = 1,
    /// Mechanical bath, `2γ_m (n_th + 1)` term.
    ThermalNp1 = 2,
    /// Mechanical bath, `2γ_m n_th` term.
    ThermalN = 3,
}

pub const CHANNELS: [Channel; 4] = [Channel::Initial, Channel::Optical, Channel::ThermalNp1, Channel::ThermalN];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub mean: Vec6,
    pub cov: Mat6,
}

/// Mean plus the covariance contribution of each [`Channel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub mean: Vec6,
    pub cov: [Mat6; 4],
}

impl ChannelState {
    pub fn initial(system: &LinearSystem) -> Self {
        let mut cov = [Mat6::zeros(); 4];
        cov[Channel::Initial as usize] = system.sigma0();
        Self { mean: Vec6::zeros(), cov }
    }

    pub fn channel(&self, c: Channel) -> &Mat6 {
        &self.cov[c as usize]
    }

    pub fn total(&self) -> MomentState {
        MomentState { mean: self.mean, cov: self.cov.iter().sum() }
    }

    fn axpy(&self, h: f64, d: &Self) -> Self {
        let hc = C64::from(h);
        Self {
            mean: self.mean + d.mean * hc,
            cov: std::array::from_fn(|k| self.cov[k] + d.cov[k] * hc),
        }
    }

    fn magnitude(&self) -> f64 {
        let m = self.mean.iter().fold(0.0, |a: f64, z| a.max(z.norm()));
        self.cov.iter().map(max_abs).fold(m, f64::max)
    }
}

/// Coefficients frozen at one time.
struct Coefficients {
    m: Mat6,
    mt: Mat6,
    lambda: Vec6,
    sources: [Mat6; 4],
}

impl Coefficients {
    fn at(system: &LinearSystem, t: f64) -> Self {
        let m = system.dynamical_matrix(t);
        let d = system.diffusion_channels(t);
        Self {
            mt: m.transpose(),
            m,
            lambda: system.drive_vector(t),
            sources: [Mat6::zeros(), d.optical, d.thermal_np1, d.thermal_n],
        }
    }

    fn rhs(&self, s: &ChannelState) -> ChannelState {
        ChannelState {
            mean: self.m * s.mean + self.lambda,
            cov: std::array::from_fn(|k| self.m * s.cov[k] + s.cov[k] * self.mt + self.sources[k]),
        }
    }
}

/// Classic fourth-order Runge-Kutta step from `t` to `t + h`.
pub fn rk4_step(system: &LinearSystem, state: &ChannelState, t: f64, h: f64) -> ChannelState {
    let c0 = Coefficients::at(system, t);
    let c1 = Coefficients::at(system, t + 0.5 * h);
    let c2 = Coefficients::at(system, t + h);
    let k1 = c0.rhs(state);
    let k2 = c1.rhs(&state.axpy(0.5 * h, &k1));
    let k3 = c1.rhs(&state.axpy(0.5 * h, &k2));
    let k4 = c2.rhs(&state.axpy(h, &k3));
    let sixth = C64::from(h / 6.0);
    ChannelState {
        mean: state.mean + (k1.mean + (k2.mean + k3.mean) * C64::from(2.0) + k4.mean) * sixth,
        cov: std::array::from_fn(|k| {
            state.cov[k] + (k1.cov[k] + (k2.cov[k] + k3.cov[k]) * C64::from(2.0) + k4.cov[k]) * sixth
        }),
    }
}

/// Integrates the channel-resolved moments over the grid, handing every grid
/// point (including `t = 0`) to `visit`.
pub fn evolve_channels<F>(system: &LinearSystem, grid: &TimeGrid, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, &ChannelState),
{
    grid.check_resolution(system.params())?;
    let h = grid.step();
    let mut state = ChannelState::initial(system);
    visit(0, 0.0, &state);
    for i in 0..grid.n_steps() {
        state = rk4_step(system, &state, grid.time(i), h);
        let t = grid.time(i + 1);
        if overflowed(state.magnitude()) {
            return Err(Error::Overflow { time: t });
        }
        visit(i + 1, t, &state);
    }
    Ok(())
}

/// Total mean and covariance at every grid point, `m(0) = 0`, `Σ(0) = Σ0`.
pub fn evolve_moments(system: &LinearSystem, grid: &TimeGrid) -> Result<Vec<MomentState>> {
    let mut out = Vec::with_capacity(grid.len());
    evolve_channels(system, grid, |_, _, s| out.push(s.total()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::types::{moment_conjugation_residual, idx};

    #[test]
    fn thermal_bath_is_stationary() {
        let p = SystemParams { e: 0.0, g_m: 0.0, g: 0.0, ..SystemParams::blue_detuned_reference(0.0) };
        let grid = TimeGrid::auto(&p, 2.0 * p.lifetime()).unwrap();
        let states = evolve_moments(&LinearSystem::new(&p), &grid).unwrap();
        for s in states.iter().step_by(97) {
            assert!((s.cov[(idx::B_DAG, idx::B)].re - p.n_th).abs() <= 1e-9 * p.n_th);
            assert!((s.cov[(idx::B, idx::B_DAG)].re - p.n_th - 1.0).abs() <= 1e-9 * p.n_th);
        }
    }

    #[test]
    fn no_pump_no_mean() {
        let p = SystemParams { e: 0.0, ..SystemParams::blue_detuned_reference(0.5) };
        let grid = TimeGrid::auto(&p, 3.0).unwrap();
        let states = evolve_moments(&LinearSystem::new(&p), &grid).unwrap();
        assert!(states.iter().all(|s| s.mean == Vec6::zeros()));
    }

    #[test]
    fn covariance_keeps_conjugation_symmetry() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let grid = TimeGrid::auto(&p, 5.0).unwrap();
        let mut worst: f64 = 0.0;
        evolve_channels(&LinearSystem::new(&p), &grid, |i, _, s| {
            if i % 100 == 0 {
                for c in &s.cov {
                    worst = worst.max(moment_conjugation_residual(c));
                }
            }
        })
        .unwrap();
        assert!(worst <= 1e-10, "{worst}");
    }
}
