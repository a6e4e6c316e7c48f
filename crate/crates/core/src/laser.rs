//! Semiclassical phonon-laser equations driven by a computed inversion:
//!
//! ```text
//! b' = (-γ_m - iω_m) b - ½ i g_m p
//! p' = ½ i g_m ΔN(t) b + (½(g - γ) - 2iJ) p
//! ```
//!
//! `b` is the stimulated phonon amplitude and `p = <o2† o1>` the supermode
//! polarization. `ΔN` is external, so the system is linear in `(b, p)`.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linear::{LinearSystem, NoiseMode, SignConvention};
use crate::params::SystemParams;
use crate::populations::{inversion_series, Method, PopulationSeries};
use crate::propagator::overflowed;
use crate::types::{C64, I};

#[derive(Debug, Clone, PartialEq)]
pub struct LaserTrajectory {
    pub times: Vec<f64>,
    pub b_s: Vec<C64>,
    pub p: Vec<C64>,
    /// Method that produced the driving inversion.
    pub inversion_method: Method,
    /// `|b(t_end)|² / |b(0)|²`.
    pub amplification: f64,
}

impl LaserTrajectory {
    /// `|b(t_i)|² / |b(0)|²`.
    pub fn amplification_at(&self, i: usize) -> f64 {
        self.b_s[i].norm_sqr() / self.b_s[0].norm_sqr()
    }
}

/// Right-hand side of the laser equations at a fixed inversion.
fn laser_rhs(params: &SystemParams, dn: f64, b: C64, p: C64) -> (C64, C64) {
    let half_gm = 0.5 * params.g_m;
    let db = C64::new(-params.gamma_m, -params.omega_m) * b - I * half_gm * p;
    let dp = I * (half_gm * dn) * b + C64::new(0.5 * (params.g - params.gamma), -2.0 * params.j) * p;
    (db, dp)
}

/// RK4 on `grid`, with `ΔN` linear between grid points (so the half-step
/// value is the mean of the neighbours).
pub fn integrate_laser_on(
    params: &SystemParams,
    grid: &TimeGrid,
    inversion: &[f64],
    b0: C64,
    p0: C64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    if inversion.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} inversion samples for {} grid points",
            inversion.len(),
            grid.len()
        )));
    }
    if b0 == C64::new(0.0, 0.0) {
        return Err(Error::ZeroAmplitude);
    }
    let h = grid.step();
    let mut bs = Vec::with_capacity(grid.len());
    let mut ps = Vec::with_capacity(grid.len());
    let (mut b, mut p) = (b0, p0);
    bs.push(b);
    ps.push(p);
    for i in 0..grid.n_steps() {
        let (n0, n1) = (inversion[i], inversion[i + 1]);
        let nm = 0.5 * (n0 + n1);
        let (kb1, kp1) = laser_rhs(params, n0, b, p);
        let (kb2, kp2) = laser_rhs(params, nm, b + kb1 * (0.5 * h), p + kp1 * (0.5 * h));
        let (kb3, kp3) = laser_rhs(params, nm, b + kb2 * (0.5 * h), p + kp2 * (0.5 * h));
        let (kb4, kp4) = laser_rhs(params, n1, b + kb3 * h, p + kp3 * h);
        b += (kb1 + (kb2 + kb3) * 2.0 + kb4) * (h / 6.0);
        p += (kp1 + (kp2 + kp3) * 2.0 + kp4) * (h / 6.0);
        if overflowed(b.norm().max(p.norm())) {
            return Err(Error::Overflow { time: grid.time(i + 1) });
        }
        bs.push(b);
        ps.push(p);
    }
    Ok((bs, ps))
}

/// Laser response to an inversion series, on the series' own grid.
pub fn integrate_laser(params: &SystemParams, inversion: &PopulationSeries, b0: C64, p0: C64) -> Result<LaserTrajectory> {
    let dn = inversion.inversions();
    let (b_s, p) = integrate_laser_on(params, &inversion.grid, &dn, b0, p0)?;
    let amplification = b_s[b_s.len() - 1].norm_sqr() / b0.norm_sqr();
    Ok(LaserTrajectory {
        times: inversion.grid.times().collect(),
        b_s,
        p,
        inversion_method: inversion.method,
        amplification,
    })
}

pub fn amplification_ratio(traj: &LaserTrajectory) -> f64 {
    traj.amplification
}

/// Largest real part among the eigenvalues of the laser equations with `ΔN`
/// frozen; the amplitude grows iff this is positive.
pub fn frozen_growth_rate(params: &SystemParams, dn: f64) -> f64 {
    let a = C64::new(-params.gamma_m, -params.omega_m);
    let d = C64::new(0.5 * (params.g - params.gamma), -2.0 * params.j);
    // off-diagonal product (-½ i g_m)(½ i g_m ΔN) = ¼ g_m² ΔN
    let bc = 0.25 * params.g_m * params.g_m * dn;
    let mean = 0.5 * (a + d);
    let root = (0.25 * (a - d) * (a - d) + bc).sqrt();
    (mean + root).re.max((mean - root).re)
}

/// Settings shared by every point of an amplification scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserSetup {
    pub t_end: f64,
    /// Fixed step count; `None` picks the step from the rates of each point.
    pub steps: Option<usize>,
    pub method: Method,
    pub noise_mode: NoiseMode,
    pub signs: SignConvention,
    pub b0: C64,
    pub p0: C64,
}

impl LaserSetup {
    /// Horizon `1/γ_m`, `b(0) = 1`, `p(0) = 0`.
    pub fn new(params: &SystemParams) -> Self {
        Self {
            t_end: params.lifetime(),
            steps: None,
            method: Method::Moments,
            noise_mode: NoiseMode::default(),
            signs: SignConvention::default(),
            b0: C64::new(1.0, 0.0),
            p0: C64::new(0.0, 0.0),
        }
    }

    pub fn grid(&self, params: &SystemParams) -> Result<TimeGrid> {
        match self.steps {
            Some(n) => TimeGrid::new(self.t_end, n),
            None => TimeGrid::auto(params, self.t_end),
        }
    }

    pub fn system(&self, params: &SystemParams) -> LinearSystem {
        LinearSystem::new(params).with_noise_mode(self.noise_mode).with_signs(self.signs)
    }

    /// Inversion plus laser for one parameter point.
    pub fn run(&self, params: &SystemParams) -> Result<(PopulationSeries, LaserTrajectory)> {
        let series = inversion_series(&self.system(params), &self.grid(params)?, self.method)?;
        let traj = integrate_laser(params, &series, self.b0, self.p0)?;
        Ok((series, traj))
    }

    /// Amplification at `t_end`; a laser overflow counts as unbounded gain.
    pub fn amplification(&self, params: &SystemParams) -> Result<f64> {
        match self.run(params) {
            Ok((_, traj)) => Ok(traj.amplification),
            Err(Error::Overflow { time }) if self.inversion_is_finite(params)? => {
                debug!("laser overflow at t = {time} for E = {}", params.e);
                Ok(f64::INFINITY)
            }
            Err(e) => Err(e),
        }
    }

    fn inversion_is_finite(&self, params: &SystemParams) -> Result<bool> {
        match inversion_series(&self.system(params), &self.grid(params)?, self.method) {
            Ok(_) => Ok(true),
            Err(Error::Overflow { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Smallest scanned pump with amplification ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub e_th: f64,
    /// Largest scanned pump below threshold with its amplification.
    pub below: (f64, f64),
    /// `e_th` with its amplification.
    pub above: (f64, f64),
    /// Every evaluated `(E, amplification)` pair in evaluation order.
    pub evaluated: Vec<(f64, f64)>,
}

/// Runs the full pipeline for each pump in `e_values` (ascending) and
/// brackets the first crossing of amplification 1.
pub fn threshold_scan(params: &SystemParams, e_values: &[f64], setup: &LaserSetup) -> Result<Threshold> {
    if e_values.iter().any(|e| !e.is_finite()) || e_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedScan);
    }
    let mut evaluated = Vec::with_capacity(e_values.len());
    for &e in e_values {
        let amp = setup.amplification(&SystemParams { e, ..*params })?;
        evaluated.push((e, amp));
        if amp >= 1.0 {
            let Some(&below) = evaluated.iter().rev().nth(1) else {
                return Err(Error::NoThresholdInRange(format!("amplification {amp:.6e} ≥ 1 already at E = {e}")));
            };
            return Ok(Threshold { e_th: e, below, above: (e, amp), evaluated });
        }
    }
    let best = evaluated.iter().map(|x| x.1).fold(0.0, f64::max);
    Err(Error::NoThresholdInRange(format!("largest amplification {best:.6e} < 1")))
}

/// Bisects the bracket of `threshold` `iterations` times, assuming the
/// amplification is monotone in the pump between the bracket ends.
pub fn refine_threshold(params: &SystemParams, threshold: &Threshold, setup: &LaserSetup, iterations: usize) -> Result<Threshold> {
    let mut out = threshold.clone();
    for _ in 0..iterations {
        let mid = 0.5 * (out.below.0 + out.above.0);
        let amp = setup.amplification(&SystemParams { e: mid, ..*params })?;
        out.evaluated.push((mid, amp));
        if amp >= 1.0 {
            out.above = (mid, amp);
        } else {
            out.below = (mid, amp);
        }
    }
    out.e_th = out.above.0;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_phonon_decays() {
        let p = SystemParams { g_m: 0.0, ..SystemParams::blue_detuned_reference(0.5) };
        let grid = TimeGrid::auto(&p, p.lifetime()).unwrap();
        let dn = vec![1e12; grid.len()];
        let (b, _) = integrate_laser_on(&p, &grid, &dn, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let end = b[b.len() - 1];
        assert!((end.norm() - (-1.0f64).exp()).abs() <= 1e-9);
    }

    #[test]
    fn mismatched_inversion_is_rejected() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let res = integrate_laser_on(&p, &grid, &[0.0; 10], C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        assert!(matches!(res, Err(Error::GridMismatch(_))));
        let res = integrate_laser_on(&p, &grid, &[0.0; 1001], C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert_eq!(res, Err(Error::ZeroAmplitude));
    }

    #[test]
    fn frozen_rate_without_coupling_is_mechanical_damping() {
        let p = SystemParams { g_m: 0.0, ..SystemParams::blue_detuned_reference(0.5) };
        assert!((frozen_growth_rate(&p, 1e10) + p.gamma_m).abs() < 1e-15);
    }

    #[test]
    fn unsorted_scan_is_rejected() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let setup = LaserSetup::new(&p);
        assert_eq!(threshold_scan(&p, &[2.0, 1.0], &setup), Err(Error::UnsortedScan));
    }
}
