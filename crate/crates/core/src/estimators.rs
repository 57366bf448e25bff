//! Macroscopic read-outs of a gyroscope state: Bloch vector, rotated-frame
//! moments, coherences between coherent states, the residual `χ` and purity.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::Channel;
use crate::error::Result;
use crate::linalg::{self, CMatrix, C64};
use crate::semiclassical;
use crate::spin_algebra::{coherent_state, SpinOperators, SpinSystem};

/// Below this polarization the direction of `<L>` is not reported.
pub const UNDEFINED_ANGLE_R: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochAngles {
    /// Polar angle from `+z`, in `[0, π]`.
    pub theta: f64,
    /// Azimuth, in `(-π, π]`.
    pub phi_az: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochEstimate {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    /// `|<L>| / l`.
    pub r: f64,
    pub angles: Option<BlochAngles>,
}

impl BlochEstimate {
    pub fn theta(&self) -> Option<f64> {
        self.angles.map(|a| a.theta)
    }

    pub fn phi_az(&self) -> Option<f64> {
        self.angles.map(|a| a.phi_az)
    }

    pub fn epsilon(&self) -> f64 {
        1.0 - self.r
    }

    /// Signed angle of `<L>` in the `xz` plane, `atan2(<Lx>, <Lz>)`. This is
    /// the frame in which `<L_x^θ> = 0`.
    pub fn frame_angle(&self) -> f64 {
        self.lx.atan2(self.lz)
    }
}

fn expect(rho: &CMatrix, op: &CMatrix) -> f64 {
    linalg::trace_product(rho, op).re
}

pub fn bloch_estimate(ops: &SpinOperators, rho: &CMatrix) -> BlochEstimate {
    let lx = expect(rho, &ops.lx);
    let ly = expect(rho, &ops.ly);
    let lz = expect(rho, &ops.lz);
    let norm = (lx * lx + ly * ly + lz * lz).sqrt();
    let r = norm / ops.sys.ell();
    let angles = (r >= UNDEFINED_ANGLE_R).then(|| {
        let mut phi_az = ly.atan2(lx);
        if phi_az <= -PI {
            phi_az = PI;
        }
        BlochAngles {
            theta: lx.hypot(ly).atan2(lz),
            phi_az,
        }
    });
    BlochEstimate {
        lx,
        ly,
        lz,
        r,
        angles,
    }
}

/// First and symmetrized second moments of `L^θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentSet {
    pub theta: f64,
    pub x: f64,
    pub z: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
}

pub fn moment_set(ops: &SpinOperators, rho: &CMatrix, theta: f64) -> MomentSet {
    let r = ops.rotated(theta);
    let sym = |a: &CMatrix, b: &CMatrix| 0.5 * expect(rho, &(a * b + b * a));
    MomentSet {
        theta,
        x: expect(rho, &r.lx),
        z: expect(rho, &r.lz),
        xx: expect(rho, &(&r.lx * &r.lx)),
        yy: expect(rho, &(&r.ly * &r.ly)),
        zz: expect(rho, &(&r.lz * &r.lz)),
        xy: sym(&r.lx, &r.ly),
        xz: sym(&r.lx, &r.lz),
    }
}

/// One-step update of `<L_x^θ>` and `<L_z^θ>` from the time-`t` moments:
///
/// ```text
/// Lx' = -(4/d²) sz cos θ <Lx Lz> - (4/d²) sz sin θ (l(l+1) - <Lx²>)
/// Lz' = (1 - 2/d²) <Lz> + (4/d²) sz sin θ <Lx Lz> + (4/d²) sz cos θ (l(l+1) - <Lz²>)
/// ```
///
/// The `Lx'` form assumes `<L_x^θ> = 0`, i.e. `θ` is the frame angle of the
/// state.
pub fn moment_update_prediction(m: &MomentSet, sz: f64, sys: SpinSystem) -> (f64, f64) {
    let d = sys.dim() as f64;
    let k = 4.0 / (d * d) * sz;
    let casimir = sys.casimir();
    let (s, c) = m.theta.sin_cos();
    let lx = -k * c * m.xz - k * s * (casimir - m.xx);
    let lz = (1.0 - 2.0 / (d * d)) * m.z + k * s * m.xz + k * c * (casimir - m.zz);
    (lx, lz)
}

/// `cos²((θ-φ)/2) - cos(θ-φ)/d + (2 l sz/d²)(cos θ + cos φ) - (2 sz - cos²((θ-φ)/2))/d²`,
/// the one-step value of `<θ|E(|θ><φ|)|φ>`.
pub fn off_diagonal_formula(sys: SpinSystem, sz: f64, theta: f64, phi: f64) -> f64 {
    let d = sys.dim() as f64;
    let lead = ((theta - phi) / 2.0).cos().powi(2);
    lead - (theta - phi).cos() / d + 2.0 * sys.ell() * sz / (d * d) * (theta.cos() + phi.cos())
        - (2.0 * sz - lead) / (d * d)
}

/// `<θ|X_k|φ>` for `k = 0..=n`, with `X_0 = |θ><φ|` and `X_{k+1} = E(X_k)`.
pub fn coherence_series(channel: &Channel, theta: f64, phi: f64, n: usize) -> Result<Vec<C64>> {
    let sys = channel.sys();
    let ket = coherent_state(sys, theta);
    let bra = coherent_state(sys, phi);
    let mut x = linalg::outer(&ket, &bra);
    let mut out = Vec::with_capacity(n + 1);
    out.push(linalg::matrix_element(&ket, &x, &bra));
    for _ in 0..n {
        x = channel.apply(&x)?;
        out.push(linalg::matrix_element(&ket, &x, &bra));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceElement {
    pub value: C64,
    /// [`off_diagonal_formula`], reported for `n = 1`.
    pub formula: Option<f64>,
}

pub fn coherence_element(
    channel: &Channel,
    theta: f64,
    phi: f64,
    n: usize,
) -> Result<CoherenceElement> {
    let series = coherence_series(channel, theta, phi, n)?;
    let formula = (n == 1)
        .then(|| off_diagonal_formula(channel.sys(), channel.config().probe.sz(), theta, phi));
    Ok(CoherenceElement {
        value: series[n],
        formula,
    })
}

/// Trace norms of `χ = E(X) - cos²((θ-φ)/2) <θ|X|φ> |θ'><φ'|` for three
/// choices of the advanced angles `θ', φ'`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ChiNorms {
    /// `θ', φ'` advanced by one step of the analytic angle law.
    pub semiclassical: f64,
    /// `θ' = θ`, `φ' = φ`.
    pub literal: f64,
    /// `θ', φ'` read off the Bloch vectors of `E(|θ><θ|)` and `E(|φ><φ|)`.
    pub bloch: f64,
}

#[derive(Clone, Debug)]
pub struct ResidualChi {
    /// The semiclassical-angle residual.
    pub chi: CMatrix,
    pub norms: ChiNorms,
}

/// One step of the analytic angle law, leaving the unstable pole in place.
fn advance_analytic(angle: f64, lambda: f64) -> f64 {
    semiclassical::analytic_theta(1.0, angle, lambda).unwrap_or(angle)
}

fn advance_bloch(channel: &Channel, angle: f64) -> Result<f64> {
    let psi = coherent_state(channel.sys(), angle);
    let out = channel.apply(&linalg::outer(&psi, &psi))?;
    Ok(bloch_estimate(channel.ops(), &out).frame_angle())
}

fn dyad(sys: SpinSystem, theta: f64, phi: f64) -> CMatrix {
    linalg::outer(&coherent_state(sys, theta), &coherent_state(sys, phi))
}

fn residual(image: &CMatrix, weight: C64, sys: SpinSystem, theta: f64, phi: f64) -> CMatrix {
    image - dyad(sys, theta, phi).map(|z| z * weight)
}

pub fn residual_chi(channel: &Channel, theta: f64, phi: f64) -> Result<ResidualChi> {
    let sys = channel.sys();
    let lambda = channel.config().probe.sz() / sys.ell();
    let image = channel.apply(&dyad(sys, theta, phi))?;
    let w = C64::new(((theta - phi) / 2.0).cos().powi(2), 0.0);

    let chi = residual(
        &image,
        w,
        sys,
        advance_analytic(theta, lambda),
        advance_analytic(phi, lambda),
    );
    let literal = residual(&image, w, sys, theta, phi);
    let bloch = residual(
        &image,
        w,
        sys,
        advance_bloch(channel, theta)?,
        advance_bloch(channel, phi)?,
    );
    Ok(ResidualChi {
        norms: ChiNorms {
            semiclassical: linalg::trace_norm(&chi),
            literal: linalg::trace_norm(&literal),
            bloch: linalg::trace_norm(&bloch),
        },
        chi,
    })
}

/// Per-step residual norms along an iterated coherence. Each variant keeps
/// its own angle track `(θ_k, φ_k)` and at step `k` evaluates
/// `E(X_k) - cos²((θ_k-φ_k)/2) <θ_k|X_k|φ_k> |θ_{k+1}><φ_{k+1}|`, with
/// `X_0 = |θ><φ|` and `X_{k+1} = E(X_k)`. Returns `n` entries.
pub fn chi_series(channel: &Channel, theta: f64, phi: f64, n: usize) -> Result<Vec<ChiNorms>> {
    let sys = channel.sys();
    let lambda = channel.config().probe.sz() / sys.ell();
    let mut x = dyad(sys, theta, phi);
    let mut sc = (theta, phi);
    let mut bl = (theta, phi);
    let mut out = Vec::with_capacity(n);

    let norm_for = |image: &CMatrix, x: &CMatrix, from: (f64, f64), to: (f64, f64)| {
        let overlap = linalg::matrix_element(
            &coherent_state(sys, from.0),
            x,
            &coherent_state(sys, from.1),
        );
        let w = overlap * ((from.0 - from.1) / 2.0).cos().powi(2);
        linalg::trace_norm(&residual(image, w, sys, to.0, to.1))
    };

    for _ in 0..n {
        let image = channel.apply(&x)?;
        let sc_next = (
            advance_analytic(sc.0, lambda),
            advance_analytic(sc.1, lambda),
        );
        let bl_next = (advance_bloch(channel, bl.0)?, advance_bloch(channel, bl.1)?);
        out.push(ChiNorms {
            semiclassical: norm_for(&image, &x, sc, sc_next),
            literal: norm_for(&image, &x, (theta, phi), (theta, phi)),
            bloch: norm_for(&image, &x, bl, bl_next),
        });
        x = image;
        sc = sc_next;
        bl = bl_next;
    }
    Ok(out)
}

/// `Tr ρ²`.
pub fn purity(rho: &CMatrix) -> f64 {
    linalg::trace_product(rho, rho).re
}

/// `1/(d Tr ρ²)`.
pub fn inverse_scaled_purity(rho: &CMatrix) -> f64 {
    1.0 / (rho.nrows() as f64 * purity(rho))
}
