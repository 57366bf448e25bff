//! Dense complex linear algebra shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// series is summed until the next term drops below machine precision
/// relative to the partial sum, and the result is squared `s` times.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings));

    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=60 {
        term = &term * &scaled;
        term.scale_mut(1.0 / k as f64);
        sum += &term;
        if one_norm(&term) <= f64::EPSILON * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Maximum absolute column sum.
pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`; the index of `b` runs fastest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Partial trace over the second factor of a `(dim_a * dim_b)`-square matrix.
pub fn partial_trace_second(m: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
    assert_eq!(m.shape(), (dim_a * dim_b, dim_a * dim_b));
    CMatrix::from_fn(dim_a, dim_a, |i, j| {
        (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
    })
}

/// Partial trace over the first factor.
pub fn partial_trace_first(m: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
    assert_eq!(m.shape(), (dim_a * dim_b, dim_a * dim_b));
    CMatrix::from_fn(dim_b, dim_b, |i, j| {
        (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
    })
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest elementwise modulus of `m - m†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn outer(ket: &CVector, bra: &CVector) -> CMatrix {
    ket * bra.adjoint()
}

/// `<bra| m |ket>`.
pub fn matrix_element(bra: &CVector, m: &CMatrix, ket: &CVector) -> C64 {
    (bra.adjoint() * m * ket)[(0, 0)]
}

/// Random full-rank density matrix from the Ginibre ensemble: `G G† / Tr(G G†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = trace(&rho);
    rho.map(|z| z / tr)
}

/// Random normalized pure state with Gaussian amplitudes.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v.unscale(n)
}
