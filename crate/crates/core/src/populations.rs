//! Supermode populations `<o_i† o_i(t)>` and the inversion `ΔN = N1 - N2`.
//!
//! Each population splits into
//!
//! * the evolved initial state, `(d(t,0) Σ0 d(t,0)ᵀ)_{o_i†, o_i}`;
//! * the coherent part `|D_i(t) + o_{i,ds}(t)|²`, with `D_1 = E1 + E2`,
//!   `D_2 = E1 - E2` the free displacements and `o_{i,ds}` the mean driven
//!   by `λ`;
//! * the noise part `∫_0^t (d(t,τ) D(τ) d(t,τ)ᵀ)_{o_i†, o_i} dτ`, split into
//!   optical and thermal sources.
//!
//! Two independent routes produce the same numbers: the propagator product
//! with trapezoid quadrature over `τ`, and the moment ODEs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linear::{LinearSystem, NoiseMode};
use crate::moments::{evolve_channels, Channel, MomentState};
use crate::propagator::{evolve_product, ProductMethod, PropagatorGrid};
use crate::types::{idx, Mat6, Vec6, C64};

/// How the populations are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Moments,
    Product(ProductMethod),
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moments" => Ok(Self::Moments),
            other => other.parse().map(Self::Product),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Moments => f.write_str("moments"),
            Self::Product(m) => m.fmt(f),
        }
    }
}

/// Additive contributions to one supermode population (or to `ΔN`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulationParts {
    pub initial: f64,
    pub drive: f64,
    pub noise_optical: f64,
    pub noise_thermal_np1: f64,
    pub noise_thermal_n: f64,
}

impl PopulationParts {
    pub fn noise_thermal(&self) -> f64 {
        self.noise_thermal_np1 + self.noise_thermal_n
    }

    pub fn noise(&self) -> f64 {
        self.noise_optical + self.noise_thermal()
    }

    pub fn total(&self) -> f64 {
        self.initial + self.drive + self.noise()
    }

    /// Part of the thermal noise proportional to `n_th`.
    pub fn thermal_occupation_share(&self, n_th: f64) -> f64 {
        self.noise_thermal_np1 * n_th / (n_th + 1.0) + self.noise_thermal_n
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            initial: self.initial - other.initial,
            drive: self.drive - other.drive,
            noise_optical: self.noise_optical - other.noise_optical,
            noise_thermal_np1: self.noise_thermal_np1 - other.noise_thermal_np1,
            noise_thermal_n: self.noise_thermal_n - other.noise_thermal_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries {
    pub grid: TimeGrid,
    pub mode1: Vec<PopulationParts>,
    pub mode2: Vec<PopulationParts>,
    pub method: Method,
    pub noise_mode: NoiseMode,
    pub n_th: f64,
    /// Largest imaginary part met while extracting real populations,
    /// relative to `max(1, population)`.
    pub imag_residue: f64,
}

impl PopulationSeries {
    pub fn len(&self) -> usize {
        self.mode1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode1.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    pub fn pop1(&self, i: usize) -> f64 {
        self.mode1[i].total()
    }

    pub fn pop2(&self, i: usize) -> f64 {
        self.mode2[i].total()
    }

    pub fn inversion(&self, i: usize) -> f64 {
        self.pop1(i) - self.pop2(i)
    }

    pub fn inversion_parts(&self, i: usize) -> PopulationParts {
        self.mode1[i].difference(&self.mode2[i])
    }

    pub fn inversions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.inversion(i)).collect()
    }

    pub fn last(&self) -> usize {
        self.len() - 1
    }

    /// Most negative population relative to the largest one; roundoff only
    /// should put this above `-1e-8`.
    pub fn worst_negativity(&self) -> f64 {
        let scale = (0..self.len())
            .map(|i| self.pop1(i).abs().max(self.pop2(i).abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let low = (0..self.len()).map(|i| self.pop1(i).min(self.pop2(i))).fold(0.0, f64::min);
        low / scale
    }
}

/// Populations read off a second-moment matrix `<v_j v_k>` (or a covariance).
fn read_pair(sigma: &Mat6) -> (C64, C64) {
    (sigma[(idx::O1_DAG, idx::O1)], sigma[(idx::O2_DAG, idx::O2)])
}

struct Assembler {
    mode1: Vec<PopulationParts>,
    mode2: Vec<PopulationParts>,
    imag_residue: f64,
}

impl Assembler {
    fn new(len: usize) -> Self {
        Self { mode1: Vec::with_capacity(len), mode2: Vec::with_capacity(len), imag_residue: 0.0 }
    }

    /// `covs` in [`Channel`] order.
    fn push(&mut self, system: &LinearSystem, t: f64, mean: &Vec6, covs: [&Mat6; 4]) {
        let (d1, d2) = system.drive().supermode_displacements(t);
        let drive = ((d1 + mean[idx::O1]).norm_sqr(), (d2 + mean[idx::O2]).norm_sqr());
        let pairs = covs.map(read_pair);
        let mut parts = [PopulationParts::default(); 2];
        for (mode, part) in parts.iter_mut().enumerate() {
            let pick = |z: (C64, C64)| if mode == 0 { z.0 } else { z.1 };
            *part = PopulationParts {
                initial: pick(pairs[Channel::Initial as usize]).re,
                drive: if mode == 0 { drive.0 } else { drive.1 },
                noise_optical: pick(pairs[Channel::Optical as usize]).re,
                noise_thermal_np1: pick(pairs[Channel::ThermalNp1 as usize]).re,
                noise_thermal_n: pick(pairs[Channel::ThermalN as usize]).re,
            };
            let imag: f64 = pairs.iter().map(|z| pick(*z).im.abs()).sum();
            self.imag_residue = self.imag_residue.max(imag / part.total().abs().max(1.0));
        }
        self.mode1.push(parts[0]);
        self.mode2.push(parts[1]);
    }

    fn finish(self, system: &LinearSystem, grid: &TimeGrid, method: Method) -> PopulationSeries {
        PopulationSeries {
            grid: *grid,
            mode1: self.mode1,
            mode2: self.mode2,
            method,
            noise_mode: system.noise_mode(),
            n_th: system.params().n_th,
            imag_residue: self.imag_residue,
        }
    }
}

/// Populations from the moment ODEs.
pub fn moment_series(system: &LinearSystem, grid: &TimeGrid) -> Result<PopulationSeries> {
    let mut asm = Assembler::new(grid.len());
    evolve_channels(system, grid, |_, t, s| {
        asm.push(system, t, &s.mean, [&s.cov[0], &s.cov[1], &s.cov[2], &s.cov[3]]);
    })?;
    Ok(asm.finish(system, grid, Method::Moments))
}

/// Populations from the propagator product. The trapezoid sums over
/// `d(t_i, τ_k)` are carried forward with the step factors,
/// `d(t_{i+1}, τ_k) = F_i d(t_i, τ_k)`, so no `P(τ)^{-1}` is formed:
///
/// ```text
/// S_{i+1} = F_i S_i F_iᵀ + h/2 (F_i D(τ_i) F_iᵀ + D(τ_{i+1}))
/// ```
///
/// This is the same discrete sum as [`noise_populations_direct`] without
/// the cancellation between `P(t)` and `P(τ)^{-1}`.
pub fn product_series(system: &LinearSystem, pg: &PropagatorGrid) -> Result<PopulationSeries> {
    let mut asm = Assembler::new(pg.grid().len());
    carry_product_sums(system, pg, |_, t, mean, covs| asm.push(system, t, mean, covs));
    Ok(asm.finish(system, pg.grid(), Method::Product(pg.method())))
}

/// Mean and covariance (summed over sources) at every grid point from the
/// propagator product.
pub fn product_moments(system: &LinearSystem, pg: &PropagatorGrid) -> Vec<MomentState> {
    let mut out = Vec::with_capacity(pg.grid().len());
    carry_product_sums(system, pg, |_, _, mean, covs| {
        out.push(MomentState { mean: *mean, cov: covs.iter().copied().sum() });
    });
    out
}

/// Hands `(i, t, mean, covariances in Channel order)` to `visit`.
fn carry_product_sums<F>(system: &LinearSystem, pg: &PropagatorGrid, mut visit: F)
where
    F: FnMut(usize, f64, &Vec6, [&Mat6; 4]),
{
    let grid = pg.grid();
    let h = grid.step();
    let w = C64::from(0.5 * h);
    let sigma0 = system.sigma0();
    let sources = |t: f64| {
        let d = system.diffusion_channels(t);
        (system.drive_vector(t), [d.optical, d.thermal_np1, d.thermal_n])
    };
    let mut mean = Vec6::zeros();
    let mut noise = [Mat6::zeros(); 3];
    let (mut lambda, mut diff) = sources(0.0);

    for (i, p) in pg.propagators().iter().enumerate() {
        let t = grid.time(i);
        if i > 0 {
            let f = pg.method().step_factor(system, grid.time(i - 1), h);
            let ft = f.transpose();
            let (lambda_next, diff_next) = sources(t);
            mean = f * mean + (f * lambda + lambda_next) * w;
            for k in 0..3 {
                noise[k] = f * noise[k] * ft + (f * diff[k] * ft + diff_next[k]) * w;
            }
            (lambda, diff) = (lambda_next, diff_next);
        }
        let init = p * sigma0 * p.transpose();
        visit(i, t, &mean, [&init, &noise[0], &noise[1], &noise[2]]);
    }
}

/// Full pipeline for one parameter point.
pub fn inversion_series(system: &LinearSystem, grid: &TimeGrid, method: Method) -> Result<PopulationSeries> {
    match method {
        Method::Moments => moment_series(system, grid),
        Method::Product(m) => product_series(system, &evolve_product(system, grid, m)?),
    }
}

/// Both routes on the same grid.
#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub moments: PopulationSeries,
    pub product: PopulationSeries,
}

impl CrossCheck {
    pub fn run(system: &LinearSystem, grid: &TimeGrid, method: ProductMethod) -> Result<Self> {
        Ok(Self {
            moments: moment_series(system, grid)?,
            product: inversion_series(system, grid, Method::Product(method))?,
        })
    }

    /// Largest relative population difference at grid point `i`.
    pub fn relative_difference(&self, i: usize) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        rel(self.moments.pop1(i), self.product.pop1(i)).max(rel(self.moments.pop2(i), self.product.pop2(i)))
    }
}

/// `(N1, N2)` from the evolved initial state alone, at every grid point.
pub fn initial_state_populations(pg: &PropagatorGrid, n_th: f64) -> Vec<(f64, f64)> {
    let sigma0 = crate::linear::initial_moments(n_th);
    pg.propagators()
        .iter()
        .map(|p| {
            let (a, b) = read_pair(&(p * sigma0 * p.transpose()));
            (a.re, b.re)
        })
        .collect()
}

/// `(N1, N2)` of the coherent part, `|D_i + o_{i,ds}|²`.
pub fn drive_populations(series: &PopulationSeries) -> Vec<(f64, f64)> {
    series.mode1.iter().zip(&series.mode2).map(|(a, b)| (a.drive, b.drive)).collect()
}

/// `(N1, N2)` of the noise part, per source.
pub fn noise_populations(series: &PopulationSeries) -> Vec<(PopulationParts, PopulationParts)> {
    let keep = |p: &PopulationParts| PopulationParts { initial: 0.0, drive: 0.0, ..*p };
    series.mode1.iter().zip(&series.mode2).map(|(a, b)| (keep(a), keep(b))).collect()
}

/// Noise populations at grid point `i_t` by direct quadrature over the
/// interval propagators `d(t, τ_k)`, `k = 0..=i_t`.
pub fn noise_populations_direct(system: &LinearSystem, pg: &PropagatorGrid, i_t: usize) -> Result<(PopulationParts, PopulationParts)> {
    let grid = pg.grid();
    let h = grid.step();
    let mut sums = [Mat6::zeros(); 3];
    for k in 0..=i_t {
        let d = pg.interval_propagator(i_t, k)?;
        let dt = d.transpose();
        let w = if k == 0 || k == i_t { 0.5 * h } else { h };
        let ch = system.diffusion_channels(grid.time(k));
        for (s, dc) in sums.iter_mut().zip([ch.optical, ch.thermal_np1, ch.thermal_n]) {
            *s += d * dc * dt * C64::from(w);
        }
    }
    let pairs = sums.map(|s| read_pair(&s));
    let part = |f: fn((C64, C64)) -> C64| PopulationParts {
        initial: 0.0,
        drive: 0.0,
        noise_optical: f(pairs[0]).re,
        noise_thermal_np1: f(pairs[1]).re,
        noise_thermal_n: f(pairs[2]).re,
    };
    Ok((part(|z| z.0), part(|z| z.1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    /// Four-term initial-state formula written out entry by entry
    /// (1-based indices in the comments).
    fn initial_literal(d: &Mat6, n_th: f64) -> (f64, f64) {
        let e = |r: usize, c: usize| d[(r - 1, c - 1)];
        let n1 = e(2, 1) * e(1, 2) + e(2, 3) * e(1, 4) + e(2, 5) * e(1, 6) * (n_th + 1.0) + e(2, 6) * e(1, 5) * n_th;
        let n2 = e(4, 1) * e(3, 2) + e(4, 3) * e(3, 4) + e(4, 5) * e(3, 6) * (n_th + 1.0) + e(4, 6) * e(3, 5) * n_th;
        (n1.re, n2.re)
    }

    #[test]
    fn matrix_form_matches_entrywise_formula() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let grid = TimeGrid::auto(&p, 2.0).unwrap();
        let pg = evolve_product(&LinearSystem::new(&p), &grid, ProductMethod::Midpoint).unwrap();
        let pops = initial_state_populations(&pg, p.n_th);
        for i in (0..grid.len()).step_by(311) {
            let (a, b) = initial_literal(pg.at(i).unwrap(), p.n_th);
            assert!((a - pops[i].0).abs() <= 1e-9 * a.abs().max(1.0));
            assert!((b - pops[i].1).abs() <= 1e-9 * b.abs().max(1.0));
        }
        assert_eq!(pops[0], (0.0, 0.0));
    }

    #[test]
    fn populations_start_empty() {
        let p = SystemParams::blue_detuned_reference(1.0);
        let grid = TimeGrid::auto(&p, 0.2).unwrap();
        let s = moment_series(&LinearSystem::new(&p), &grid).unwrap();
        assert!(s.pop1(0).abs() <= 1e-12);
        assert!(s.pop2(0).abs() <= 1e-12);
    }

    #[test]
    fn parts_add_up() {
        let p = SystemParams::blue_detuned_reference(0.5);
        let grid = TimeGrid::auto(&p, 3.0).unwrap();
        let s = moment_series(&LinearSystem::new(&p), &grid).unwrap();
        let i = s.last();
        let parts = s.inversion_parts(i);
        assert!((parts.total() - s.inversion(i)).abs() <= 1e-8 * s.pop1(i).abs());
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Moments, Method::Product(ProductMethod::Euler), Method::Product(ProductMethod::Midpoint)] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("rk45".parse::<Method>().is_err());
    }
}
