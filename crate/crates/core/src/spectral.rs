//! Coupled-mode analysis of the gain-loss pair without the mechanics.
//!
//! `H_PT = [[-iγ, J], [J, ig]]` in the `(a1, a2)` basis, frequencies measured
//! from the cavity resonance. Its eigenvalues are
//! `½ i(g - γ) ∓ √(J² - ((g + γ)/2)²)`, with the root continued to `+i|·|`
//! once `J < (g + γ)/2`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::types::{C64, I};

/// Relative width of the exceptional band in `4J² - (g + γ)²`.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-12;
/// Minimum prominence of a response peak, relative to the curve maximum.
pub const PEAK_PROMINENCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PtRegime {
    /// `J > (g + γ)/2`: real splitting.
    Unbroken,
    Exceptional,
    /// `J < (g + γ)/2`: split imaginary parts.
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtEigensystem {
    /// `ω_1 = center - root`, `ω_2 = center + root`.
    pub eigenvalues: [C64; 2],
    /// Rows are the `(a1, a2)` coefficients of `q1`, `q2`; `None` where the
    /// normalization diverges or vanishes.
    pub eigenmodes: Option<Matrix2<C64>>,
    /// Normalized `<0|q1 q2†|0>`; `None` together with `eigenmodes`.
    pub overlap: Option<C64>,
    pub regime: PtRegime,
}

pub fn pt_hamiltonian(params: &SystemParams) -> Matrix2<C64> {
    let j = C64::from(params.j);
    Matrix2::new(-I * params.gamma, j, j, I * params.g)
}

fn discriminant(params: &SystemParams) -> f64 {
    let s = params.g + params.gamma;
    4.0 * params.j * params.j - s * s
}

pub fn pt_regime(params: &SystemParams) -> PtRegime {
    let s = params.g + params.gamma;
    let d = discriminant(params);
    if d.abs() <= EXCEPTIONAL_TOLERANCE * (4.0 * params.j * params.j).max(s * s) {
        PtRegime::Exceptional
    } else if d > 0.0 {
        PtRegime::Unbroken
    } else {
        PtRegime::Broken
    }
}

/// `(center, root)` of the eigenvalues.
fn center_and_root(params: &SystemParams) -> (C64, C64) {
    let center = I * (0.5 * (params.g - params.gamma));
    let d = 0.25 * discriminant(params);
    let root = if d >= 0.0 { C64::from(d.sqrt()) } else { I * (-d).sqrt() };
    (center, root)
}

pub fn pt_eigenvalues(params: &SystemParams) -> [C64; 2] {
    let (c, r) = center_and_root(params);
    [c - r, c + r]
}

/// Coefficients `q1 = (-J/s, -(i(g+γ) - s)/(2s))`,
/// `q2 = (J/s, (i(g+γ) + s)/(2s))` with `s = √(4J² - (g+γ)²)`.
pub fn pt_eigenmodes(params: &SystemParams) -> Result<Matrix2<C64>> {
    if pt_regime(params) == PtRegime::Exceptional {
        return Err(Error::ExceptionalPoint);
    }
    if params.j == 0.0 {
        return Err(Error::DegenerateEigenmode);
    }
    let s = 2.0 * center_and_root(params).1;
    let ig = I * (params.g + params.gamma);
    let j = C64::from(params.j);
    Ok(Matrix2::new(-j / s, -(ig - s) / (2.0 * s), j / s, (ig + s) / (2.0 * s)))
}

/// Normalized coefficient inner product `Σ_k q1_k conj(q2_k)`.
pub fn mode_overlap(params: &SystemParams) -> Result<C64> {
    let q = pt_eigenmodes(params)?;
    let q1 = Vector2::new(q[(0, 0)], q[(0, 1)]);
    let q2 = Vector2::new(q[(1, 0)], q[(1, 1)]);
    Ok(q2.dotc(&q1) / (q1.norm() * q2.norm()))
}

pub fn pt_eigensystem(params: &SystemParams) -> PtEigensystem {
    let eigenmodes = pt_eigenmodes(params).ok();
    PtEigensystem {
        eigenvalues: pt_eigenvalues(params),
        eigenmodes,
        overlap: eigenmodes.and_then(|_| mode_overlap(params).ok()),
        regime: pt_regime(params),
    }
}

/// Eigenvalues of `H_PT` from a complex Schur decomposition, sorted by real
/// then imaginary part.
pub fn numerical_eigenvalues(params: &SystemParams) -> [C64; 2] {
    let t = nalgebra::Schur::new(pt_hamiltonian(params)).unpack().1;
    let mut ev = [t[(0, 0)], t[(1, 1)]];
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResponse {
    pub deltas: Vec<f64>,
    /// `|a2|²` per detuning.
    pub response: Vec<f64>,
    pub peak_flags: Vec<bool>,
    /// The drift has an eigenvalue with nonnegative real part, so the
    /// response is the transient amplitude at the horizon.
    pub unstable: bool,
}

impl ClassicalResponse {
    pub fn peak_count(&self) -> usize {
        self.peak_flags.iter().filter(|f| **f).count()
    }

    pub fn peak_positions(&self) -> Vec<f64> {
        self.deltas.iter().zip(&self.peak_flags).filter(|(_, f)| **f).map(|(d, _)| *d).collect()
    }
}

/// `ȧ = A a + (E e^{-iΔt}, 0)`.
fn drift(params: &SystemParams) -> Matrix2<C64> {
    let mj = -I * params.j;
    Matrix2::new(C64::from(-params.gamma), mj, mj, C64::from(params.g))
}

pub fn is_stable(params: &SystemParams) -> bool {
    // eigenvalues of the drift are -i times those of H_PT
    pt_eigenvalues(params).iter().all(|w| (-I * w).re < 0.0)
}

fn stationary_a2(params: &SystemParams, delta: f64) -> f64 {
    let m = Matrix2::identity() * (-I * delta) - drift(params);
    match m.lu().solve(&Vector2::new(C64::from(params.e), C64::from(0.0))) {
        Some(a) => a[1].norm_sqr(),
        None => f64::INFINITY,
    }
}

fn transient_a2(params: &SystemParams, delta: f64, horizon: f64) -> f64 {
    let a = drift(params);
    let rate = [params.gamma, params.g.abs(), params.j, delta.abs()].into_iter().fold(1e-3, f64::max);
    let n = ((horizon * rate * 40.0).ceil() as usize).max(1);
    let h = horizon / n as f64;
    let f = |t: f64, y: Vector2<C64>| a * y + Vector2::new((-I * (delta * t)).exp() * params.e, C64::from(0.0));
    let mut y = Vector2::zeros();
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + k1 * C64::from(0.5 * h));
        let k3 = f(t + 0.5 * h, y + k2 * C64::from(0.5 * h));
        let k4 = f(t + h, y + k3 * C64::from(h));
        y += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
    }
    y[1].norm_sqr()
}

/// Output-cavity intensity `|a2|²` across a detuning scan. Unstable pairs are
/// integrated from rest up to `horizon` instead.
pub fn classical_response(params: &SystemParams, deltas: &[f64], horizon: f64) -> ClassicalResponse {
    let unstable = !is_stable(params);
    let response: Vec<f64> = deltas
        .iter()
        .map(|&d| if unstable { transient_a2(params, d, horizon) } else { stationary_a2(params, d) })
        .collect();
    ClassicalResponse {
        deltas: deltas.to_vec(),
        peak_flags: find_peaks(&response, PEAK_PROMINENCE),
        response,
        unstable,
    }
}

/// Flags interior local maxima whose topographic prominence is at least
/// `min_prominence` times the largest value.
pub fn find_peaks(y: &[f64], min_prominence: f64) -> Vec<bool> {
    let n = y.len();
    let mut flags = vec![false; n];
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if n < 3 || !top.is_finite() {
        return flags;
    }
    for i in 1..n - 1 {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        // lowest point on each side before the curve climbs above y[i]
        let mut left = y[i];
        for &v in y[..i].iter().rev() {
            if v > y[i] {
                break;
            }
            left = left.min(v);
        }
        let mut right = y[i];
        for &v in &y[i + 1..] {
            if v > y[i] {
                break;
            }
            right = right.min(v);
        }
        flags[i] = y[i] - left.max(right) >= min_prominence * top;
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(gamma: f64, g: f64, j: f64) -> SystemParams {
        SystemParams { gamma, g, j, e: 1.0, ..SystemParams::blue_detuned_reference(g) }
    }

    #[test]
    fn passive_pair_has_orthogonal_supermodes() {
        let p = pair(1.0, -1.0, 2.0);
        let es = pt_eigensystem(&p);
        assert_eq!(es.regime, PtRegime::Unbroken);
        assert!((es.eigenvalues[0] - C64::new(-2.0, -1.0)).norm() < 1e-15);
        assert!((es.eigenvalues[1] - C64::new(2.0, -1.0)).norm() < 1e-15);
        assert!(es.overlap.unwrap().norm() < 1e-15);
    }

    #[test]
    fn eigenmodes_are_eigenvectors() {
        for p in [pair(1.0, 0.5, 2.0), pair(1.0, 0.5, 0.3), pair(0.7, -0.2, 5.0)] {
            let h = pt_hamiltonian(&p);
            let q = pt_eigenmodes(&p).unwrap();
            let w = pt_eigenvalues(&p);
            for k in 0..2 {
                let v = Vector2::new(q[(k, 0)], q[(k, 1)]);
                assert!((h * v - v * w[k]).norm() <= 1e-13 * v.norm());
            }
        }
    }

    #[test]
    fn exceptional_point() {
        let p = pair(1.0, 0.5, 0.75);
        assert_eq!(pt_regime(&p), PtRegime::Exceptional);
        let w = pt_eigenvalues(&p);
        assert_eq!(w[0], w[1]);
        assert_eq!(w[0], C64::new(0.0, -0.25));
        assert_eq!(mode_overlap(&p), Err(Error::ExceptionalPoint));
        assert_eq!(mode_overlap(&pair(1.0, 0.5, 0.0)), Err(Error::DegenerateEigenmode));
    }

    #[test]
    fn peak_detector_ignores_shoulders() {
        let y = [0.0, 1.0, 0.995, 0.996, 0.5, 0.0];
        assert_eq!(find_peaks(&y, 0.01), vec![false, true, false, false, false, false]);
        let y = [0.0, 1.0, 0.5, 0.8, 0.0];
        assert_eq!(find_peaks(&y, 0.01).iter().filter(|f| **f).count(), 2);
    }

    #[test]
    fn gain_above_loss_is_unstable() {
        let p = pair(1.0, 1.0, 3.0);
        assert!(!is_stable(&p));
        let r = classical_response(&p, &[0.0, 1.0], 5.0);
        assert!(r.unstable);
        assert!(r.response.iter().all(|v| v.is_finite()));
    }
}
