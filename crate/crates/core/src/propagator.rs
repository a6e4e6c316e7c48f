//! Time-ordered exponential of the linear system as an ordered matrix product.
//!
//! `P(τ_i) = T exp{∫_0^{τ_i} M dτ}` is accumulated step by step on a uniform
//! grid, and interval propagators follow from `d(t, τ) = P(t) P(τ)^{-1}`.
//! The inverse is exponentially ill-conditioned once the optical block decays
//! or the optomechanical gain takes over, so it is guarded by a condition
//! number check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linear::LinearSystem;
use crate::types::{max_abs, norm1, Mat6, C64};

/// Magnitude beyond which an evolution is reported as overflowed.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// NaN counts as overflow.
pub fn overflowed(magnitude: f64) -> bool {
    magnitude.is_nan() || magnitude > OVERFLOW_LIMIT
}
/// Largest acceptable 1-norm condition number of `P(τ)`.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMethod {
    /// `P_{i+1} = (I + M(τ_i) h) P_i`, first order.
    #[serde(rename = "euler_product")]
    Euler,
    /// `P_{i+1} = (I + A + A²/2) P_i` with `A = M(τ_i + h/2) h`, second order.
    #[serde(rename = "midpoint_product")]
    Midpoint,
}

impl ProductMethod {
    pub fn order(self) -> u32 {
        match self {
            Self::Euler => 1,
            Self::Midpoint => 2,
        }
    }

    /// One-step factor from `t` to `t + h`.
    pub fn step_factor(self, system: &LinearSystem, t: f64, h: f64) -> Mat6 {
        match self {
            Self::Euler => Mat6::identity() + system.dynamical_matrix(t) * C64::from(h),
            Self::Midpoint => {
                let a = system.dynamical_matrix(t + 0.5 * h) * C64::from(h);
                Mat6::identity() + a + a * a * C64::from(0.5)
            }
        }
    }
}

impl FromStr for ProductMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_product" | "euler" => Ok(Self::Euler),
            "midpoint_product" | "midpoint" => Ok(Self::Midpoint),
            other => Err(Error::UnknownVariant { kind: "product method", value: other.into() }),
        }
    }
}

impl fmt::Display for ProductMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Euler => "euler_product",
            Self::Midpoint => "midpoint_product",
        })
    }
}

/// Propagators `P(τ_i)` on every grid point, `P(0) = I`.
#[derive(Debug, Clone)]
pub struct PropagatorGrid {
    grid: TimeGrid,
    method: ProductMethod,
    props: Vec<Mat6>,
}

impl PropagatorGrid {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn method(&self) -> ProductMethod {
        self.method
    }

    pub fn propagators(&self) -> &[Mat6] {
        &self.props
    }

    /// `P(τ_i) = d(τ_i, 0)`.
    pub fn at(&self, i: usize) -> Result<&Mat6> {
        self.props.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.props.len() })
    }

    /// `P(τ_i)^{-1}`, refused when the condition number exceeds
    /// [`CONDITION_LIMIT`].
    pub fn inverse(&self, i: usize) -> Result<Mat6> {
        let p = self.at(i)?;
        checked_inverse(p, self.grid.time(i))
    }

    /// `d(τ_{i_t}, τ_{i_tau}) = P(τ_{i_t}) P(τ_{i_tau})^{-1}`.
    pub fn interval_propagator(&self, i_t: usize, i_tau: usize) -> Result<Mat6> {
        if i_tau > i_t {
            return Err(Error::ReversedInterval { t: i_t, tau: i_tau });
        }
        let p_t = self.at(i_t)?;
        if i_t == i_tau {
            return Ok(Mat6::identity());
        }
        Ok(p_t * self.inverse(i_tau)?)
    }
}

/// Inverse by LU with partial pivoting, guarded by the 1-norm condition number.
pub fn checked_inverse(p: &Mat6, time: f64) -> Result<Mat6> {
    let inv = p
        .lu()
        .try_inverse()
        .ok_or(Error::IllConditioned { time, condition: f64::INFINITY })?;
    let condition = norm1(p) * norm1(&inv);
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned { time, condition });
    }
    Ok(inv)
}

/// Builds the ordered product on every grid point.
pub fn evolve_product(system: &LinearSystem, grid: &TimeGrid, method: ProductMethod) -> Result<PropagatorGrid> {
    grid.check_resolution(system.params())?;
    let h = grid.step();
    let mut props = Vec::with_capacity(grid.len());
    let mut p = Mat6::identity();
    props.push(p);
    for i in 0..grid.n_steps() {
        p = method.step_factor(system, grid.time(i), h) * p;
        let scale = max_abs(&p);
        if overflowed(scale) {
            return Err(Error::Overflow { time: grid.time(i + 1) });
        }
        props.push(p);
    }
    Ok(PropagatorGrid { grid: *grid, method, props })
}
