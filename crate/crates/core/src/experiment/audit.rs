use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ExperimentConfig, Scenario};
use crate::channel::{joint_coupling, special_time, Channel, ChannelConfig, Variant};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::povm::{
    induced_povm_closed_form, induced_povm_general, outcome_probabilities, span_projection,
    Prefactor,
};
use crate::spin_algebra::{probe_state, SpinSystem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// A measured quantity that is reported but not judged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<AuditCheck>,
    pub observations: Vec<Observation>,
}

#[derive(Serialize)]
pub struct AuditSummary<'a> {
    pub passed: bool,
    pub n_checks: usize,
    pub failed: Vec<&'a str>,
}

impl AuditReport {
    fn new(scenario: Scenario, seed: u64) -> Self {
        AuditReport {
            scenario,
            seed,
            passed: true,
            checks: Vec::new(),
            observations: Vec::new(),
        }
    }

    /// Passes when `measured <= tolerance`.
    fn check(&mut self, name: String, measured: f64, tolerance: f64) {
        let passed = measured <= tolerance;
        self.passed &= passed;
        self.checks.push(AuditCheck {
            name,
            measured,
            tolerance,
            passed,
        });
    }

    fn observe(&mut self, name: String, value: f64, note: &str) {
        self.observations.push(Observation {
            name,
            value,
            note: note.to_string(),
        });
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn summary(&self) -> AuditSummary<'_> {
        AuditSummary {
            passed: self.passed,
            n_checks: self.checks.len(),
            failed: self.failed(),
        }
    }
}

/// Runs `channel_audit` or `povm_audit`.
pub fn run_audit(cfg: &ExperimentConfig) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.scenario {
        Scenario::ChannelAudit => channel_audit(cfg, &mut rng),
        Scenario::PovmAudit => povm_audit(cfg, &mut rng),
        other => Err(Error::param(
            "scenario",
            format!("{} is not an audit", other.name()),
        )),
    }
}

fn tau_label(sys: SpinSystem, tau: f64) -> String {
    if tau == special_time(sys) {
        "pi/d".to_string()
    } else {
        format!("{tau}")
    }
}

fn channel_audit(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<AuditReport> {
    let mut report = AuditReport::new(Scenario::ChannelAudit, cfg.seed);
    for &ell in &cfg.audit_ell_grid {
        let sys = SpinSystem::from_ell(ell)?;
        let d = sys.dim();
        let taus = [special_time(sys), cfg.tau.unwrap_or(0.3)];
        for &tau in &taus {
            let label = format!("l={ell},tau={}", tau_label(sys, tau));
            let ch = Channel::new(ChannelConfig::new(
                sys,
                probe_state(0.0)?,
                tau,
                Variant::Unitary,
            )?)?;
            let oracle = linalg::expm(&joint_coupling(ch.ops()).map(|z| z * C64::new(0.0, -tau)));
            report.check(
                format!("coefficients[{label}]"),
                linalg::max_abs_diff(ch.joint_unitary(), &oracle),
                cfg.tolerance("coefficients"),
            );

            for sz in [0.0, 0.25, 0.5] {
                let label = format!("{label},sz={sz}");
                let ch = Channel::new(ChannelConfig::new(
                    sys,
                    probe_state(sz)?,
                    tau,
                    Variant::Unitary,
                )?)?;
                let (mut closed, mut trace, mut rotated, mut identity, mut precession) =
                    (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
                for _ in 0..cfg.n_random {
                    let rho = linalg::random_density_matrix(d, rng);
                    let truth = ch.apply_unitary(&rho)?;
                    closed = closed.max(linalg::max_abs_diff(&truth, &ch.apply_closed_form(&rho)?));
                    trace = trace.max((linalg::trace(&truth) - C64::new(1.0, 0.0)).norm());
                    identity = identity.max(linalg::max_abs_diff(&truth, &rho));
                    if ch.config().is_special_time() {
                        let theta = rng.random_range(0.0..std::f64::consts::PI);
                        let rot = ch.apply_rotated(&rho, theta)?;
                        rotated =
                            rotated.max(linalg::max_abs_diff(&rot, &ch.apply_measurement(&rho)?));
                        precession = precession.max(linalg::max_abs_diff(&rot, &truth));
                    }
                }
                report.check(
                    format!("closed_form[{label}]"),
                    closed,
                    cfg.tolerance("closed_form"),
                );
                report.check(
                    format!("trace_preservation[{label}]"),
                    trace,
                    cfg.tolerance("trace_preservation"),
                );
                if ch.config().is_special_time() {
                    report.check(
                        format!("rotated[{label}]"),
                        rotated,
                        cfg.tolerance("rotated"),
                    );
                    report.observe(
                        format!("rotated_vs_unitary[{label}]"),
                        precession,
                        "max elementwise gap; the rotated expression has no precession commutator",
                    );
                }
                if tau == 0.0 {
                    report.check(
                        format!("identity[{label}]"),
                        identity,
                        cfg.tolerance("identity"),
                    );
                }
                let choi = ch.choi()?;
                report.check(
                    format!("choi_min_eigenvalue[{label}]"),
                    -choi.min_eigenvalue,
                    cfg.tolerance("choi_min_eigenvalue"),
                );
                report.check(
                    format!("choi_partial_trace[{label}]"),
                    choi.partial_trace_residual,
                    cfg.tolerance("choi_partial_trace"),
                );
            }
        }
    }
    Ok(report)
}

const AXES: [(&str, [f64; 3]); 4] = [
    ("x", [1.0, 0.0, 0.0]),
    ("y", [0.0, 1.0, 0.0]),
    ("z", [0.0, 0.0, 1.0]),
    ("xz", [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]),
];

fn distance_from_multiple_of_identity(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mean = linalg::trace(m) / n as f64;
    linalg::max_abs_diff(m, &CMatrix::identity(n, n).map(|z| z * mean))
}

fn povm_audit(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<AuditReport> {
    let mut report = AuditReport::new(Scenario::PovmAudit, cfg.seed);
    for &ell in &cfg.audit_ell_grid {
        let sys = SpinSystem::from_ell(ell)?;
        let d = sys.dim();
        for sz in [0.1, 0.5] {
            let ccfg =
                ChannelConfig::new(sys, probe_state(sz)?, cfg.tau_for(sys), Variant::Unitary)?;
            let ch = Channel::new(ccfg)?;
            for (axis, u) in AXES {
                let label = format!("l={ell},sz={sz},u={axis}");
                let general = induced_povm_general(u, &ch)?;
                report.check(
                    format!("completeness[{label}]"),
                    general.completeness_residual(),
                    cfg.tolerance("completeness"),
                );
                report.check(
                    format!("povm_min_eigenvalue[{label}]"),
                    -general.min_eigenvalue(),
                    cfg.tolerance("povm_min_eigenvalue"),
                );
                let mut prob = 0.0f64;
                for _ in 0..cfg.n_random {
                    let rho = linalg::random_density_matrix(d, rng);
                    let (a, b) = general.probabilities(&rho);
                    let (x, y) = outcome_probabilities(&rho, u, &ch)?;
                    prob = prob.max((a - x).abs()).max((b - y).abs());
                }
                report.check(
                    format!("probability[{label}]"),
                    prob,
                    cfg.tolerance("probability"),
                );

                let diff = &general.lambda_plus - &general.lambda_minus;
                report.observe(
                    format!("difference_outside_span_I_L[{label}]"),
                    span_projection(&diff, ch.ops()).residual,
                    "part of Λ+ - Λ- outside span{I, Lx, Ly, Lz}",
                );
                if axis == "z" {
                    report.observe(
                        format!("general_distance_from_identity[{label}]"),
                        distance_from_multiple_of_identity(&general.lambda_plus),
                        "u parallel to <S>: how far the general Λ+ is from a multiple of I",
                    );
                }

                if ch.config().is_special_time() {
                    for (name, prefactor) in [("half", Prefactor::Half), ("full", Prefactor::Full)]
                    {
                        let closed = induced_povm_closed_form(u, &ch, prefactor)?;
                        report.observe(
                            format!("closed_form_{name}_vs_general[{label}]"),
                            linalg::max_abs_diff(&closed.lambda_plus, &general.lambda_plus),
                            "max elementwise |Λ+ closed - Λ+ general|",
                        );
                        if axis == "z" {
                            report.check(
                                format!("closed_form_{name}_information_free[{label}]"),
                                distance_from_multiple_of_identity(&closed.lambda_plus),
                                cfg.tolerance("completeness"),
                            );
                        }
                    }
                    let half = induced_povm_closed_form(u, &ch, Prefactor::Half)?;
                    report.observe(
                        format!("closed_form_half_completeness[{label}]"),
                        half.completeness_residual(),
                        "max elementwise |Λ+ + Λ- - I| with the ½ prefactor",
                    );
                }
            }
        }
    }
    Ok(report)
}
