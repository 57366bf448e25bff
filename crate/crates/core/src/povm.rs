//! Measurement on the gyroscope induced by measuring the outgoing probe
//! along `u`, `Π± = I/2 ± u·S`.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::spin_algebra::{spin_half_operators, SpinOperators};

#[derive(Clone, Debug)]
pub struct PovmPair {
    pub lambda_plus: CMatrix,
    pub lambda_minus: CMatrix,
    pub axis_u: [f64; 3],
}

impl PovmPair {
    /// Max elementwise deviation of `Λ+ + Λ-` from `I`.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.lambda_plus.nrows();
        linalg::max_abs_diff(
            &(&self.lambda_plus + &self.lambda_minus),
            &CMatrix::identity(n, n),
        )
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.lambda_plus).min(linalg::min_eigenvalue(&self.lambda_minus))
    }

    /// `(Tr[Λ+ ρ], Tr[Λ- ρ])`.
    pub fn probabilities(&self, rho: &CMatrix) -> (f64, f64) {
        (
            linalg::trace_product(&self.lambda_plus, rho).re,
            linalg::trace_product(&self.lambda_minus, rho).re,
        )
    }
}

/// Prefactor of the identity term in the closed form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefactor {
    /// `½ Tr[Π± ξ] I`. Not complete: `Λ+ + Λ- = I/2`.
    #[default]
    Half,
    /// `Tr[Π± ξ] I`, which restores `Λ+ + Λ- = I`.
    Full,
}

fn check_unit(u: [f64; 3]) -> Result<()> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::param("u", format!("|u| = {norm}, expected 1")));
    }
    Ok(())
}

/// `Π± = I/2 ± u·S` on the probe.
pub fn probe_projectors(u: [f64; 3]) -> (CMatrix, CMatrix) {
    let s = spin_half_operators();
    let us = s[0].scale(u[0]) + s[1].scale(u[1]) + s[2].scale(u[2]);
    let half = CMatrix::identity(2, 2).scale(0.5);
    (&half + &us, &half - &us)
}

/// `Λ± = Tr_S[(I ⊗ √ξ) U† (I ⊗ Π±) U (I ⊗ √ξ)]`.
pub fn induced_povm_general(u: [f64; 3], channel: &Channel) -> Result<PovmPair> {
    check_unit(u)?;
    let d = channel.dim();
    let id = CMatrix::identity(d, d);
    let root = linalg::kron(&id, &channel.config().probe.sqrt_matrix());
    let uu = channel.joint_unitary();
    let (plus, minus) = probe_projectors(u);
    let element = |pi: &CMatrix| {
        let inner = uu.adjoint() * linalg::kron(&id, pi) * uu;
        linalg::partial_trace_second(&(&root * inner * &root), d, 2)
    };
    Ok(PovmPair {
        lambda_plus: element(&plus),
        lambda_minus: element(&minus),
        axis_u: u,
    })
}

/// `Λ± = c Tr[Π± ξ] I ± (<S> × u)·L/(l + ½)` with `c` set by `prefactor`.
/// Only defined at `τ = π/d`.
pub fn induced_povm_closed_form(
    u: [f64; 3],
    channel: &Channel,
    prefactor: Prefactor,
) -> Result<PovmPair> {
    check_unit(u)?;
    let cfg = channel.config();
    if !cfg.is_special_time() {
        return Err(Error::param(
            "tau",
            format!("closed-form POVM needs tau = pi/d, got {}", cfg.tau),
        ));
    }
    let sz = cfg.probe.sz();
    let ops = channel.ops();
    let d = channel.dim();
    let c = match prefactor {
        Prefactor::Half => 0.5,
        Prefactor::Full => 1.0,
    };
    // <S> × u with <S> = (0, 0, sz)
    let axis = [-sz * u[1], sz * u[0], 0.0];
    let tilt = ops.along(axis).scale(1.0 / (channel.sys().ell() + 0.5));
    let id = CMatrix::identity(d, d);
    let p_plus = 0.5 + u[2] * sz;
    let p_minus = 0.5 - u[2] * sz;
    Ok(PovmPair {
        lambda_plus: id.scale(c * p_plus) + &tilt,
        lambda_minus: id.scale(c * p_minus) - &tilt,
        axis_u: u,
    })
}

/// Outcome probabilities of `Π±` on the probe after one collision with `ρ`.
pub fn outcome_probabilities(rho: &CMatrix, u: [f64; 3], channel: &Channel) -> Result<(f64, f64)> {
    check_unit(u)?;
    let d = channel.dim();
    if rho.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            rows: rho.nrows(),
            cols: rho.ncols(),
        });
    }
    let uu = channel.joint_unitary();
    let joint = uu * linalg::kron(rho, &channel.config().probe.matrix()) * uu.adjoint();
    let probe = linalg::partial_trace_first(&joint, d, 2);
    let (plus, minus) = probe_projectors(u);
    Ok((
        linalg::trace_product(&plus, &probe).re,
        linalg::trace_product(&minus, &probe).re,
    ))
}

/// Hilbert-Schmidt projection of `op` onto `span{I, Lx, Ly, Lz}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpanProjection {
    /// Coefficients of `I, Lx, Ly, Lz`.
    pub coefficients: [C64; 4],
    /// Max elementwise size of the part outside the span.
    pub residual: f64,
}

pub fn span_projection(op: &CMatrix, ops: &SpinOperators) -> SpanProjection {
    let d = ops.dim() as f64;
    let l_norm = ops.sys.casimir() * d / 3.0;
    let basis = [&ops.lx, &ops.ly, &ops.lz];
    let c0 = linalg::trace(op) / d;
    let mut coefficients = [c0, C64::default(), C64::default(), C64::default()];
    let mut fit = CMatrix::identity(ops.dim(), ops.dim()).map(|z| z * c0);
    for (k, b) in basis.into_iter().enumerate() {
        // Tr[L_k op] / Tr[L_k²]; L_k Hermitian
        let ck = linalg::trace_product(b, op) / l_norm;
        coefficients[k + 1] = ck;
        fit += b.map(|z| z * ck);
    }
    SpanProjection {
        coefficients,
        residual: linalg::max_abs_diff(op, &fit),
    }
}
