use serde::{Deserialize, Serialize};

use crate::drive::DriveEnvelope;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Minimum number of steps per period of the fastest rate.
pub const MIN_STEPS_PER_RATE: f64 = 20.0;
/// Steps per period used when the step is chosen automatically.
pub const DEFAULT_STEPS_PER_RATE: f64 = 40.0;

/// Uniform grid `τ_i = i · t_end / n_steps`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!("t_end must be positive, got {t_end}")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self { t_end, n_steps })
    }

    /// Grid whose step resolves every rate of the linear system, including
    /// the optomechanical coupling `g_m |E1|`, with
    /// [`DEFAULT_STEPS_PER_RATE`] steps per unit phase.
    pub fn auto(params: &SystemParams, t_end: f64) -> Result<Self> {
        let rate = resolution_rate(params, t_end).max(f64::MIN_POSITIVE);
        let h = 1.0 / (DEFAULT_STEPS_PER_RATE * rate);
        let n = (t_end / h).ceil().max(1.0);
        Self::new(t_end, n as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            self.t_end * i as f64 / self.n_steps as f64
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Same horizon with the step halved.
    pub fn refined(&self) -> Self {
        Self { t_end: self.t_end, n_steps: 2 * self.n_steps }
    }

    /// Index of the grid point closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        ((t / self.step()).round().max(0.0) as usize).min(self.n_steps)
    }

    /// Rejects grids with fewer than [`MIN_STEPS_PER_RATE`] steps per
    /// period of the fastest oscillation or damping rate.
    pub fn check_resolution(&self, params: &SystemParams) -> Result<()> {
        let rate = params.fastest_rate();
        if rate == 0.0 {
            return Ok(());
        }
        let limit = 1.0 / (MIN_STEPS_PER_RATE * rate);
        if self.step() > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { step: self.step(), limit });
        }
        Ok(())
    }
}

/// Fastest rate of the linear system over `[0, horizon]`.
pub fn resolution_rate(params: &SystemParams, horizon: f64) -> f64 {
    let coupling = params.g_m * DriveEnvelope::new(params).e1_bound(horizon);
    params.fastest_rate().max(coupling)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_point_is_exact() {
        let g = TimeGrid::new(1.0 / 0.037, 12345).unwrap();
        assert_eq!(g.time(g.n_steps()), 1.0 / 0.037);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.len(), 12346);
    }

    #[test]
    fn auto_grid_resolves_reference_rates() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let g = TimeGrid::auto(&p, p.lifetime()).unwrap();
        g.check_resolution(&p).unwrap();
        assert!(g.step() <= 1.0 / (40.0 * 45.6) + 1e-15);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let g = TimeGrid::new(p.lifetime(), 100).unwrap();
        assert!(matches!(g.check_resolution(&p), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn degenerate_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }
}
