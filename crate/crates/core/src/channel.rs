//! The single-collision channel `E(ρ) = Tr_S[U (ρ ⊗ ξ) U†]`, `U = exp(-i τ L·S)`.
//!
//! Three evaluations are provided and cross-checked against each other:
//!
//! * [`Channel::apply_unitary`] builds `U = a I + b L·S` on the joint
//!   `gyroscope ⊗ probe` space, conjugates and traces the probe out. This is
//!   the reference implementation.
//! * [`Channel::apply_closed_form`] evaluates the expanded four-term form
//!   (scalar, anticommutator, `Tr_S[L·S (ρ⊗ξ) L·S]`, precession commutator)
//!   using banded ladder-operator sandwiches, `O(d²)` per application.
//! * [`Channel::apply_rotated`] evaluates the six-term expression written
//!   with `L_i^θ` at `τ = π/d`. It has no precession term: it is the
//!   total-angular-momentum measurement channel.
//!
//! All maps accept arbitrary (non-Hermitian) operators so that coherences
//! `|θ><φ|` can be propagated by linearity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{self, BlochEstimate};
use crate::linalg::{self, CMatrix, C64, I, ZERO};
use crate::spin_algebra::{
    raising_elements, spin_half_operators, DensityMatrix, ProbeState, SpinOperators, SpinSystem,
};

/// `exp(-i τ L·S) = a(τ) I + b(τ) L·S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionCoefficients {
    pub a: C64,
    pub b: C64,
    pub tau: f64,
}

pub fn evolution_coefficients(dim: usize, tau: f64) -> EvolutionCoefficients {
    let d = dim as f64;
    let slow = C64::from_polar(1.0, -(d - 1.0) * tau / 4.0);
    let fast = C64::from_polar(1.0, (d + 1.0) * tau / 4.0);
    EvolutionCoefficients {
        a: slow * ((d + 1.0) / (2.0 * d)) + fast * ((d - 1.0) / (2.0 * d)),
        b: (slow - fast) * (2.0 / d),
        tau,
    }
}

/// `(L·S)^k = a_k I + b_k L·S` for `k = 0..=k_max`, from the recurrence
/// `a_{k+1} = l(l+1)/4 · b_k`, `b_{k+1} = a_k - b_k / 2`.
pub fn power_coefficients(sys: SpinSystem, k_max: usize) -> Vec<(f64, f64)> {
    let quarter_casimir = sys.casimir() / 4.0;
    let mut out = Vec::with_capacity(k_max + 1);
    let (mut a, mut b) = (1.0, 0.0);
    out.push((a, b));
    for _ in 0..k_max {
        (a, b) = (quarter_casimir * b, a - b / 2.0);
        out.push((a, b));
    }
    out
}

/// Partial sums of `Σ_k (-iτ)^k / k! (a_k, b_k)` truncated at `k_max`.
pub fn series_coefficients(sys: SpinSystem, tau: f64, k_max: usize) -> (C64, C64) {
    let mut weight = C64::new(1.0, 0.0);
    let step = C64::new(0.0, -tau);
    let mut sum = (ZERO, ZERO);
    for (k, (ak, bk)) in power_coefficients(sys, k_max).into_iter().enumerate() {
        if k > 0 {
            weight = weight * step / k as f64;
        }
        sum.0 += weight * ak;
        sum.1 += weight * bk;
    }
    sum
}

/// `L·S` on the joint space, gyroscope index major.
pub fn joint_coupling(ops: &SpinOperators) -> CMatrix {
    let [sx, sy, sz] = spin_half_operators();
    linalg::kron(&ops.lx, &sx) + linalg::kron(&ops.ly, &sy) + linalg::kron(&ops.lz, &sz)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Unitary,
    #[default]
    ClosedForm,
    RotatedMeasurement,
}

/// Everything that fixes one collision: spin, probe, interaction time and
/// which evaluation of the channel to use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub sys: SpinSystem,
    pub probe: ProbeState,
    pub tau: f64,
    pub variant: Variant,
}

impl ChannelConfig {
    /// `τ = 0` is accepted (identity channel); negative or non-finite times
    /// are not. `RotatedMeasurement` requires `τ = π/d`.
    pub fn new(sys: SpinSystem, probe: ProbeState, tau: f64, variant: Variant) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::param(
                "tau",
                format!("{tau} is not a finite non-negative time"),
            ));
        }
        let cfg = ChannelConfig {
            sys,
            probe,
            tau,
            variant,
        };
        if variant == Variant::RotatedMeasurement && !cfg.is_special_time() {
            return Err(Error::param(
                "tau",
                format!("the rotated measurement channel needs tau = pi/d, got {tau}"),
            ));
        }
        Ok(cfg)
    }

    pub fn at_special_time(sys: SpinSystem, probe: ProbeState, variant: Variant) -> Self {
        ChannelConfig {
            sys,
            probe,
            tau: special_time(sys),
            variant,
        }
    }

    pub fn is_special_time(&self) -> bool {
        let t = special_time(self.sys);
        (self.tau - t).abs() <= 1e-12 * t.max(1.0)
    }

    pub fn with_variant(self, variant: Variant) -> Result<Self> {
        ChannelConfig::new(self.sys, self.probe, self.tau, variant)
    }
}

/// `τ = π/d`.
pub fn special_time(sys: SpinSystem) -> f64 {
    PI / sys.dim() as f64
}

/// A channel with its operators and joint unitary precomputed.
#[derive(Clone, Debug)]
pub struct Channel {
    cfg: ChannelConfig,
    ops: SpinOperators,
    coeffs: EvolutionCoefficients,
    unitary: CMatrix,
    ladder: Vec<f64>,
    m: Vec<f64>,
}

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        let cfg = ChannelConfig::new(cfg.sys, cfg.probe, cfg.tau, cfg.variant)?;
        let ops = SpinOperators::new(cfg.sys);
        let coeffs = evolution_coefficients(cfg.sys.dim(), cfg.tau);
        let n = 2 * cfg.sys.dim();
        let unitary = CMatrix::identity(n, n).map(|z| z * coeffs.a)
            + joint_coupling(&ops).map(|z| z * coeffs.b);
        let m = (0..cfg.sys.dim()).map(|i| cfg.sys.m(i)).collect();
        Ok(Channel {
            cfg,
            ladder: raising_elements(cfg.sys),
            ops,
            coeffs,
            unitary,
            m,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    pub fn ops(&self) -> &SpinOperators {
        &self.ops
    }

    pub fn sys(&self) -> SpinSystem {
        self.cfg.sys
    }

    pub fn dim(&self) -> usize {
        self.cfg.sys.dim()
    }

    pub fn coefficients(&self) -> EvolutionCoefficients {
        self.coeffs
    }

    /// `a I + b L·S` on the `2d`-dimensional joint space.
    pub fn joint_unitary(&self) -> &CMatrix {
        &self.unitary
    }

    fn check_dim(&self, op: &CMatrix) -> Result<()> {
        let d = self.dim();
        if op.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                rows: op.nrows(),
                cols: op.ncols(),
            });
        }
        Ok(())
    }

    /// Applies the configured variant.
    pub fn apply(&self, op: &CMatrix) -> Result<CMatrix> {
        match self.cfg.variant {
            Variant::Unitary => self.apply_unitary(op),
            Variant::ClosedForm => self.apply_closed_form(op),
            Variant::RotatedMeasurement => self.apply_measurement(op),
        }
    }

    pub fn apply_unitary(&self, op: &CMatrix) -> Result<CMatrix> {
        self.check_dim(op)?;
        let joint = linalg::kron(op, &self.cfg.probe.matrix());
        let evolved = &self.unitary * joint * self.unitary.adjoint();
        Ok(linalg::partial_trace_second(&evolved, self.dim(), 2))
    }

    /// The expanded form: scalar term, `{ρ, L·<S>}`, `Tr_S[L·S (ρ⊗ξ) L·S]`
    /// and the precession commutator `(2/d) i sin(τd/2) [ρ, L·<S>]`.
    pub fn apply_closed_form(&self, op: &CMatrix) -> Result<CMatrix> {
        let mut out = self.apply_measurement(op)?;
        let d = self.dim() as f64;
        let sz = self.cfg.probe.sz();
        let precession = I * (2.0 / d) * (self.cfg.tau * d / 2.0).sin() * sz;
        // [ρ, L_z]_{ij} = ρ_ij (m_j - m_i)
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                out[(i, j)] += precession * op[(i, j)] * (self.m[j] - self.m[i]);
            }
        }
        Ok(out)
    }

    /// The closed form without the precession commutator. At `τ = π/d` this
    /// is the measurement channel written out by [`Channel::apply_rotated`]
    /// for every frame angle.
    pub fn apply_measurement(&self, op: &CMatrix) -> Result<CMatrix> {
        self.check_dim(op)?;
        let d = self.dim() as f64;
        let quarter = self.cfg.tau * d / 4.0;
        let s2 = quarter.sin().powi(2);
        let scalar = quarter.cos().powi(2) + s2 / (d * d);
        let sz = self.cfg.probe.sz();
        let anti = 4.0 / (d * d) * s2 * sz;
        let coupling = 16.0 / (d * d) * s2;

        let mut out = op.map(|z| z * scalar);
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                out[(i, j)] += op[(i, j)] * (anti * (self.m[i] + self.m[j]));
            }
        }
        out += self.coupling_sandwich(op).map(|z| z * coupling);
        Ok(out)
    }

    /// `Tr_S[L·S (ρ⊗ξ) L·S] = ¼ L_z ρ L_z + (p↑/4) L+ ρ L- + (p↓/4) L- ρ L+`.
    pub fn coupling_sandwich(&self, op: &CMatrix) -> CMatrix {
        let n = self.dim();
        let (up, down) = self.cfg.probe.populations();
        let c = &self.ladder;
        CMatrix::from_fn(n, n, |i, j| {
            let mut v = op[(i, j)] * (0.25 * self.m[i] * self.m[j]);
            if i + 1 < n && j + 1 < n {
                v += op[(i + 1, j + 1)] * (0.25 * up * c[i] * c[j]);
            }
            if i >= 1 && j >= 1 {
                v += op[(i - 1, j - 1)] * (0.25 * down * c[i - 1] * c[j - 1]);
            }
            v
        })
    }

    /// The six-term expression in the frame rotated by `theta` about `y`,
    /// with leading term `(d²+1)/(2d²) ρ`. Only defined at `τ = π/d`.
    pub fn apply_rotated(&self, op: &CMatrix, theta: f64) -> Result<CMatrix> {
        self.check_dim(op)?;
        if !self.cfg.is_special_time() {
            return Err(Error::param(
                "tau",
                format!(
                    "rotated-frame expression needs tau = pi/d, got {}",
                    self.cfg.tau
                ),
            ));
        }
        let d = self.dim() as f64;
        let d2 = d * d;
        let sz = self.cfg.probe.sz();
        let (s, c) = theta.sin_cos();
        let r = self.ops.rotated(theta);
        let sandwich = |a: &CMatrix, b: &CMatrix| a * op * b;

        let mut out = op.map(|z| z * ((d2 + 1.0) / (2.0 * d2)));
        let sum = sandwich(&r.lx, &r.lx) + sandwich(&r.ly, &r.ly) + sandwich(&r.lz, &r.lz);
        out += sum.scale(2.0 / d2);
        let yz = sandwich(&r.ly, &r.lz) - sandwich(&r.lz, &r.ly);
        out += yz.map(|z| z * I * (4.0 / d2 * sz * s));
        let yx = sandwich(&r.ly, &r.lx) - sandwich(&r.lx, &r.ly);
        out += yx.map(|z| z * I * (4.0 / d2 * sz * c));
        out += linalg::anticommutator(&r.lz, op).scale(2.0 / d2 * sz * c);
        out -= linalg::anticommutator(&r.lx, op).scale(2.0 / d2 * sz * s);
        Ok(out)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho.matrix())?;
        DensityMatrix::new(out)
    }

    /// Unnormalized Choi matrix `Σ_ij |i><j| ⊗ E(|i><j|)` (input factor first)
    /// of the configured variant, with its spectrum and trace-preservation
    /// diagnostics.
    pub fn choi(&self) -> Result<ChoiReport> {
        let d = self.dim();
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(i, j)] = C64::new(1.0, 0.0);
                let image = self.apply(&unit)?;
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = image[(a, b)];
                    }
                }
            }
        }
        let min_eigenvalue = linalg::min_eigenvalue(&choi);
        let reduced = linalg::partial_trace_second(&choi, d, d);
        let partial_trace_residual = linalg::max_abs_diff(&reduced, &CMatrix::identity(d, d));
        Ok(ChoiReport {
            matrix: choi,
            min_eigenvalue,
            partial_trace_residual,
        })
    }

    /// Applies the channel `n` times, recording Bloch estimates and purity.
    pub fn iterate(&self, rho0: &DensityMatrix, n: usize, retain: bool) -> Result<Trajectory> {
        self.check_dim(rho0.matrix())?;
        let mut records = Vec::with_capacity(n + 1);
        let mut rho = rho0.matrix().clone();
        records.push(self.record(0, &rho, retain));
        for step in 1..=n {
            rho = self.apply(&rho)?;
            let min_eigenvalue = linalg::min_eigenvalue(&rho);
            if min_eigenvalue < -POSITIVITY_DRIFT {
                return Err(Error::NumericalDegradation {
                    step,
                    min_eigenvalue,
                });
            }
            records.push(self.record(step, &rho, retain));
        }
        Ok(Trajectory { records })
    }

    fn record(&self, step: usize, rho: &CMatrix, retain: bool) -> TrajectoryRecord {
        TrajectoryRecord {
            step,
            bloch: estimators::bloch_estimate(&self.ops, rho),
            purity: estimators::purity(rho),
            rho: retain.then(|| rho.clone()),
        }
    }
}

/// Largest negative eigenvalue tolerated along a trajectory.
pub const POSITIVITY_DRIFT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ChoiReport {
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
    /// Max elementwise deviation of `Tr_out C` from `I_d`.
    pub partial_trace_residual: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub bloch: BlochEstimate,
    pub purity: f64,
    pub rho: Option<CMatrix>,
}

/// Records at steps `0, 1, …, n`; record 0 is the initial state.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn polarizations(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.bloch.r).collect()
    }

    /// Polar angles; `None` where the Bloch vector vanishes.
    pub fn polar_angles(&self) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.bloch.theta()).collect()
    }

    pub fn purities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.purity).collect()
    }
}

pub fn apply_channel_unitary(rho: &CMatrix, cfg: ChannelConfig) -> Result<CMatrix> {
    Channel::new(cfg)?.apply_unitary(rho)
}

pub fn apply_channel_closed_form(rho: &CMatrix, cfg: ChannelConfig) -> Result<CMatrix> {
    Channel::new(cfg)?.apply_closed_form(rho)
}

pub fn apply_channel_rotated(rho: &CMatrix, theta: f64, cfg: ChannelConfig) -> Result<CMatrix> {
    Channel::new(cfg)?.apply_rotated(rho, theta)
}

pub fn choi_matrix(cfg: ChannelConfig) -> Result<ChoiReport> {
    Channel::new(cfg)?.choi()
}

pub fn iterate_channel(rho0: &DensityMatrix, n: usize, cfg: ChannelConfig) -> Result<Trajectory> {
    Channel::new(cfg)?.iterate(rho0, n, false)
}

/// Coherent-state density matrix `|θ><θ|`.
pub fn coherent_density(sys: SpinSystem, theta: f64) -> DensityMatrix {
    DensityMatrix::coherent(sys, theta)
}
