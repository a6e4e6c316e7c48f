use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat6 = SMatrix<C64, 6, 6>;
pub type Vec6 = SVector<C64, 6>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Component order of the operator vector `(o1, o1†, o2, o2†, b, b†)`.
pub mod idx {
    pub const O1: usize = 0;
    pub const O1_DAG: usize = 1;
    pub const O2: usize = 2;
    pub const O2_DAG: usize = 3;
    pub const B: usize = 4;
    pub const B_DAG: usize = 5;
}

/// Index of the conjugate partner of component `k`.
#[inline]
pub fn partner(k: usize) -> usize {
    k ^ 1
}

/// Permutation exchanging each operator with its conjugate.
pub fn swap_matrix() -> Mat6 {
    Mat6::from_fn(|r, c| if c == partner(r) { C64::new(1.0, 0.0) } else { ZERO })
}

/// `S X S` for the conjugate-pair swap `S`, computed by index permutation.
pub fn swap_conjugate(x: &Mat6) -> Mat6 {
    Mat6::from_fn(|r, c| x[(partner(r), partner(c))])
}

/// Largest entry modulus.
pub fn max_abs(x: &Mat6) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Induced 1-norm (maximum column sum).
pub fn norm1(x: &Mat6) -> f64 {
    x.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Relative residual of the conjugation symmetry `S X S = conj(X)`.
pub fn conjugation_residual(x: &Mat6) -> f64 {
    let scale = max_abs(x);
    if scale == 0.0 {
        return 0.0;
    }
    max_abs(&(swap_conjugate(x) - x.map(|z| z.conj()))) / scale
}

/// Relative residual of `<v_j v_k>* = <v_{k'} v_{j'}>` (primes mark the
/// conjugate partner), the symmetry of second-moment and diffusion matrices.
pub fn moment_conjugation_residual(x: &Mat6) -> f64 {
    let scale = max_abs(x);
    if scale == 0.0 {
        return 0.0;
    }
    let mirrored = Mat6::from_fn(|r, c| x[(partner(c), partner(r))]);
    max_abs(&(mirrored - x.map(|z| z.conj()))) / scale
}
