//! Angular-momentum operators, spin coherent states and probe states.
//!
//! Everything is expressed in the `|l, m>` basis ordered by descending `m`
//! (`m = l` is index 0). The spin quantum number is stored as the integer
//! `2l` so that half-integer spins never pass through a float.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

/// Hilbert-space descriptor of a spin-`l` system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SpinSystem {
    twice_ell: u32,
}

impl SpinSystem {
    pub fn from_twice_ell(twice_ell: u32) -> Result<Self> {
        if twice_ell == 0 {
            return Err(Error::InvalidSpin("l must be at least 1/2".into()));
        }
        Ok(SpinSystem { twice_ell })
    }

    /// Accepts any `l >= 1/2` that is an exact multiple of 1/2.
    pub fn from_ell(ell: f64) -> Result<Self> {
        let twice = 2.0 * ell;
        if !twice.is_finite() || twice.fract() != 0.0 || twice < 1.0 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpin(format!(
                "l = {ell} is not a positive multiple of 1/2"
            )));
        }
        Self::from_twice_ell(twice as u32)
    }

    pub fn twice_ell(&self) -> u32 {
        self.twice_ell
    }

    pub fn ell(&self) -> f64 {
        f64::from(self.twice_ell) / 2.0
    }

    /// `d = 2l + 1`.
    pub fn dim(&self) -> usize {
        self.twice_ell as usize + 1
    }

    /// `l(l + 1)`.
    pub fn casimir(&self) -> f64 {
        let j = f64::from(self.twice_ell);
        j * (j + 2.0) / 4.0
    }

    /// `m` of the basis vector at `index`.
    pub fn m(&self, index: usize) -> f64 {
        (f64::from(self.twice_ell) - 2.0 * index as f64) / 2.0
    }

    pub fn basis_state(&self, index: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[index] = ONE;
        v
    }

    /// `|l, l>`.
    pub fn highest_weight(&self) -> CVector {
        self.basis_state(0)
    }
}

impl TryFrom<f64> for SpinSystem {
    type Error = Error;

    fn try_from(ell: f64) -> Result<Self> {
        SpinSystem::from_ell(ell)
    }
}

impl From<SpinSystem> for f64 {
    fn from(sys: SpinSystem) -> f64 {
        sys.ell()
    }
}

/// `L_x, L_y, L_z` together with the ladder operators they were built from.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub sys: SpinSystem,
    pub lx: CMatrix,
    pub ly: CMatrix,
    pub lz: CMatrix,
    pub l_plus: CMatrix,
    pub l_minus: CMatrix,
}

/// `L_x^θ, L_y^θ = L_y, L_z^θ`: the components of `L` in axes rotated by
/// `θ` about `y`.
#[derive(Clone, Debug)]
pub struct RotatedOperators {
    pub theta: f64,
    pub lx: CMatrix,
    pub ly: CMatrix,
    pub lz: CMatrix,
}

/// Superdiagonal entries of `L+`: `<m+1| L+ |m> = sqrt((l - m)(l + m + 1))`,
/// stored at index `i` for the column `i + 1`.
pub(crate) fn raising_elements(sys: SpinSystem) -> Vec<f64> {
    let j = i64::from(sys.twice_ell());
    (1..sys.dim())
        .map(|col| {
            let two_m = j - 2 * col as i64;
            // 4 (l - m)(l + m + 1) = (2l - 2m)(2l + 2m + 2)
            let prod = (j - two_m) * (j + two_m + 2);
            (prod as f64).sqrt() / 2.0
        })
        .collect()
}

pub fn angular_momentum_operators(sys: SpinSystem) -> SpinOperators {
    let d = sys.dim();
    let mut l_plus = CMatrix::zeros(d, d);
    for (i, c) in raising_elements(sys).into_iter().enumerate() {
        l_plus[(i, i + 1)] = C64::new(c, 0.0);
    }
    let l_minus = l_plus.transpose();
    let lz = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(sys.m(i), 0.0)
        } else {
            ZERO
        }
    });
    let lx = (&l_plus + &l_minus).scale(0.5);
    // (L+ - L-) / 2i
    let ly = (&l_plus - &l_minus).map(|z| z * C64::new(0.0, -0.5));
    SpinOperators {
        sys,
        lx,
        ly,
        lz,
        l_plus,
        l_minus,
    }
}

impl SpinOperators {
    pub fn new(sys: SpinSystem) -> Self {
        angular_momentum_operators(sys)
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    /// `n · L` for a real 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> CMatrix {
        self.lx.scale(n[0]) + self.ly.scale(n[1]) + self.lz.scale(n[2])
    }

    pub fn rotated(&self, theta: f64) -> RotatedOperators {
        rotated_operators(self, theta)
    }

    /// `exp(-i φ L_z)`, diagonal in this basis.
    pub fn rotation_z(&self, phi: f64) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::from_polar(1.0, -phi * self.sys.m(i))
            } else {
                ZERO
            }
        })
    }

    /// `exp(-i θ L_y)` built column by column from Wigner small-d elements.
    pub fn rotation_y(&self, theta: f64) -> CMatrix {
        wigner_small_d(self.sys, theta).map(|x| C64::new(x, 0.0))
    }
}

pub fn rotated_operators(ops: &SpinOperators, theta: f64) -> RotatedOperators {
    let (s, c) = theta.sin_cos();
    RotatedOperators {
        theta,
        lx: ops.lx.scale(c) - ops.lz.scale(s),
        ly: ops.ly.clone(),
        lz: ops.lx.scale(s) + ops.lz.scale(c),
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Real matrix `d^l_{m', m}(θ) = <l m'| exp(-i θ L_y) |l m>` via the Wigner sum.
pub fn wigner_small_d(sys: SpinSystem, theta: f64) -> nalgebra::DMatrix<f64> {
    let n = sys.twice_ell() as usize;
    let d = sys.dim();
    let lf = ln_factorials(n);
    let (s, c) = (theta / 2.0).sin_cos();
    // Row index a <-> m' = l - a, column b <-> m = l - b.
    // j + m = n - b, j - m = b, j + m' = n - a, j - m' = a.
    nalgebra::DMatrix::from_fn(d, d, |a, b| {
        let norm = 0.5 * (lf[n - a] + lf[a] + lf[n - b] + lf[b]);
        let kmin = a.saturating_sub(b);
        let kmax = (n - b).min(a);
        let mut sum = 0.0;
        for k in kmin..=kmax {
            // (j+m-k)! k! (j-m'-k)! (m'-m+k)!
            let denom = lf[n - b - k] + lf[k] + lf[a - k] + lf[b + k - a];
            // cos^(2j - m' + m - 2k) sin^(m' - m + 2k), with m' - m = b - a.
            let cos_exp = (n as i64 + a as i64 - b as i64 - 2 * k as i64) as i32;
            let sin_exp = (b as i64 - a as i64 + 2 * k as i64) as i32;
            let sign = if (b + k - a) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (norm - denom).exp() * c.powi(cos_exp) * s.powi(sin_exp);
        }
        sum
    })
}

/// Spin coherent state `|θ> = exp(-i θ L_y) |l, l>`, real amplitudes
/// `sqrt(C(2l, k)) cos^(2l-k)(θ/2) sin^k(θ/2)` for `m = l - k`.
pub fn coherent_state(sys: SpinSystem, theta: f64) -> CVector {
    let n = sys.twice_ell() as usize;
    let lf = ln_factorials(n);
    let (s, c) = (theta / 2.0).sin_cos();
    CVector::from_fn(sys.dim(), |k, _| {
        let binom = 0.5 * (lf[n] - lf[k] - lf[n - k]);
        C64::new(binom.exp() * c.powi((n - k) as i32) * s.powi(k as i32), 0.0)
    })
}

/// State of the incoming spin-1/2 particle, `ξ = I/2 + 2<S_z> S_z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeState {
    sz: f64,
}

pub fn probe_state(sz: f64) -> Result<ProbeState> {
    if !sz.is_finite() || sz.abs() > 0.5 {
        return Err(Error::ProbeNotPositive(sz));
    }
    Ok(ProbeState { sz })
}

impl ProbeState {
    pub fn new(sz: f64) -> Result<Self> {
        probe_state(sz)
    }

    pub fn sz(&self) -> f64 {
        self.sz
    }

    /// Populations of `|↑>` and `|↓>`.
    pub fn populations(&self) -> (f64, f64) {
        (0.5 + self.sz, 0.5 - self.sz)
    }

    /// `<S> = (0, 0, <S_z>)`.
    pub fn mean_spin(&self) -> [f64; 3] {
        [0.0, 0.0, self.sz]
    }

    /// `ξ` in the `(↑, ↓)` basis.
    pub fn matrix(&self) -> CMatrix {
        let (up, down) = self.populations();
        CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(up, 0.0),
            C64::new(down, 0.0),
        ]))
    }

    /// Principal square root of `ξ`.
    pub fn sqrt_matrix(&self) -> CMatrix {
        let (up, down) = self.populations();
        CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(up.sqrt(), 0.0),
            C64::new(down.sqrt(), 0.0),
        ]))
    }
}

/// `S_x, S_y, S_z` of a spin-1/2 in the `(↑, ↓)` basis.
pub fn spin_half_operators() -> [CMatrix; 3] {
    let ops = SpinOperators::new(SpinSystem { twice_ell: 1 });
    [ops.lx, ops.ly, ops.lz]
}

/// Hermitian, unit-trace, positive semidefinite `d × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Self::POSITIVITY_TOL)
    }

    /// Validates with a custom lower bound `-tol` on the spectrum.
    pub fn with_tolerance(m: CMatrix, positivity_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState(format!(
                "{}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let herm = linalg::hermiticity_residual(&m);
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity residual {herm:e}"
            )));
        }
        let tr = linalg::trace(&m);
        if (tr - ONE).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = linalg::min_eigenvalue(&m);
        if min < -positivity_tol {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m))
    }

    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state norm {n}")));
        }
        Ok(DensityMatrix(linalg::outer(psi, psi)))
    }

    pub fn maximally_mixed(sys: SpinSystem) -> Self {
        let d = sys.dim();
        DensityMatrix(CMatrix::identity(d, d).unscale(d as f64))
    }

    pub fn coherent(sys: SpinSystem, theta: f64) -> Self {
        DensityMatrix(linalg::outer(
            &coherent_state(sys, theta),
            &coherent_state(sys, theta),
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use super::*;
    use crate::linalg::{commutator, expm, matrix_element, max_abs_diff};

    fn spins() -> Vec<SpinSystem> {
        [1, 2, 3, 4, 7, 10, 20]
            .into_iter()
            .map(|t| SpinSystem::from_twice_ell(t).unwrap())
            .collect()
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let ops = SpinOperators::new(SpinSystem::from_ell(0.5).unwrap());
        let h = 0.5;
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(h, 0.0), C64::new(h, 0.0), ZERO]);
        let y = CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -h), C64::new(0.0, h), ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[C64::new(h, 0.0), ZERO, ZERO, C64::new(-h, 0.0)]);
        assert_eq!(max_abs_diff(&ops.lx, &x), 0.0);
        assert_eq!(max_abs_diff(&ops.ly, &y), 0.0);
        assert_eq!(max_abs_diff(&ops.lz, &z), 0.0);
    }

    #[test]
    fn su2_algebra_and_casimir() {
        for sys in spins() {
            let ops = SpinOperators::new(sys);
            let d = sys.dim();
            let lhs = commutator(&ops.lx, &ops.ly);
            let rhs = ops.lz.map(|z| z * C64::i());
            assert!(max_abs_diff(&lhs, &rhs) < 1e-13);
            let cas = &ops.lx * &ops.lx + &ops.ly * &ops.ly + &ops.lz * &ops.lz;
            let want = CMatrix::identity(d, d).scale(sys.casimir());
            assert!(max_abs_diff(&cas, &want) < 1e-12);
            for m in [&ops.lx, &ops.ly, &ops.lz] {
                assert!(linalg::hermiticity_residual(m) < 1e-14);
            }
        }
    }

    #[test]
    fn raising_annihilates_top_state() {
        for sys in spins() {
            let ops = SpinOperators::new(sys);
            let v = &ops.l_plus * sys.highest_weight();
            assert!(v.iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(SpinSystem::from_ell(2.5).unwrap().dim(), 6);
        assert!(SpinSystem::from_ell(0.0).is_err());
        assert!(SpinSystem::from_ell(1.25).is_err());
        assert!(SpinSystem::from_ell(f64::NAN).is_err());
        assert_eq!(SpinSystem::from_ell(0.5).unwrap().casimir(), 0.75);
    }

    #[test]
    fn coherent_state_examples() {
        let half = SpinSystem::from_ell(0.5).unwrap();
        let v = coherent_state(half, PI / 2.0);
        assert!((v[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        for sys in spins() {
            let top = coherent_state(sys, 0.0);
            assert_eq!(top, sys.highest_weight());
            let ops = SpinOperators::new(sys);
            for theta in [0.1, 1.0, PI / 2.0, 2.5, PI] {
                let v = coherent_state(sys, theta);
                assert!((v.norm() - 1.0).abs() < 1e-12);
                let ez = matrix_element(&v, &ops.lz, &v).re;
                let ex = matrix_element(&v, &ops.lx, &v).re;
                assert!((ez - sys.ell() * theta.cos()).abs() < 1e-12);
                assert!((ex - sys.ell() * theta.sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_state_matches_dense_exponential() {
        for sys in spins() {
            let ops = SpinOperators::new(sys);
            for theta in [0.3, 1.9, 3.0] {
                let gen = ops.ly.map(|z| z * C64::new(0.0, -theta));
                let v = expm(&gen) * sys.highest_weight();
                let w = coherent_state(sys, theta);
                let err = (v - w).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-10, "l={} θ={theta}: {err}", sys.ell());
            }
        }
    }

    #[test]
    fn wigner_matrix_matches_dense_exponential() {
        for sys in spins() {
            let ops = SpinOperators::new(sys);
            let theta = 1.234;
            let gen = ops.ly.map(|z| z * C64::new(0.0, -theta));
            assert!(max_abs_diff(&expm(&gen), &ops.rotation_y(theta)) < 1e-10);
        }
    }

    #[test]
    fn rotated_operator_examples() {
        for sys in spins() {
            let ops = SpinOperators::new(sys);
            let r0 = ops.rotated(0.0);
            assert_eq!(max_abs_diff(&r0.lx, &ops.lx), 0.0);
            assert_eq!(max_abs_diff(&r0.lz, &ops.lz), 0.0);
            let q = ops.rotated(PI / 2.0);
            assert!(max_abs_diff(&q.lx, &(-&ops.lz)) < 1e-15);
            assert!(max_abs_diff(&q.lz, &ops.lx) < 1e-15);
            for theta in [0.4, 2.2, -1.0] {
                let r = ops.rotated(theta);
                let lhs = commutator(&r.lx, &r.ly);
                assert!(max_abs_diff(&lhs, &r.lz.map(|z| z * C64::i())) < 1e-13);
                let cas = &r.lx * &r.lx + &r.ly * &r.ly + &r.lz * &r.lz;
                let d = sys.dim();
                assert!(max_abs_diff(&cas, &CMatrix::identity(d, d).scale(sys.casimir())) < 1e-12);
                assert!(linalg::hermiticity_residual(&r.lx) < 1e-14);
                assert!(linalg::hermiticity_residual(&r.lz) < 1e-14);
            }
        }
    }

    #[test]
    fn probe_examples() {
        let mixed = probe_state(0.0).unwrap().matrix();
        assert_eq!(mixed, CMatrix::identity(2, 2).scale(0.5));
        let up = probe_state(0.5).unwrap().matrix();
        assert_eq!(up[(0, 0)], ONE);
        assert_eq!(up[(1, 1)], ZERO);
        let p = probe_state(0.3).unwrap();
        let (a, b) = p.populations();
        assert!((a - 0.8).abs() < 1e-15 && (b - 0.2).abs() < 1e-15);
        assert!(probe_state(0.51).is_err());
        assert!(probe_state(-0.7).is_err());
        // ξ = I/2 + 2 <S_z> S_z
        let [_, _, sz] = spin_half_operators();
        let xi = CMatrix::identity(2, 2).scale(0.5) + sz.scale(2.0 * 0.3);
        assert!(max_abs_diff(&xi, &p.matrix()) < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let sys = SpinSystem::from_ell(1.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(sys);
        assert!(DensityMatrix::new(mixed.matrix().clone()).is_ok());
        let bad = CMatrix::identity(3, 3);
        assert!(DensityMatrix::new(bad).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(neg).is_err());
    }
}
