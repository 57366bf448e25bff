//! Configured runs that write CSV tables and JSON reports, each paired with
//! a `<output>.manifest.json`.

mod audit;
pub mod cli;
mod output;
mod runners;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::{special_time, Channel, ChannelConfig, Variant};
use crate::error::{Error, Result};
use crate::spin_algebra::{probe_state, SpinSystem};

pub use audit::{run_audit, AuditCheck, AuditReport, Observation};
pub use output::{manifest_path, write_density_dump, DensityDumpSidecar, RunManifest};
pub use runners::{run_chi_norm, run_coherence, run_purity_scan, run_trajectory};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    #[default]
    Trajectory,
    CompareSemiclassical,
    Coherence,
    ChiNorm,
    PurityScan,
    PovmAudit,
    ChannelAudit,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Trajectory => "trajectory",
            Scenario::CompareSemiclassical => "compare_semiclassical",
            Scenario::Coherence => "coherence",
            Scenario::ChiNorm => "chi_norm",
            Scenario::PurityScan => "purity_scan",
            Scenario::PovmAudit => "povm_audit",
            Scenario::ChannelAudit => "channel_audit",
        }
    }

    pub fn is_audit(self) -> bool {
        matches!(self, Scenario::PovmAudit | Scenario::ChannelAudit)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum TauMode {
    /// `τ = π/d`.
    #[default]
    PiOverD,
    /// `τ` taken from the `tau` field.
    Explicit,
}

/// Flat run configuration. Every field can be given in the JSON file and
/// overridden on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Spin `l`, a positive multiple of 1/2.
    pub ell: f64,
    /// Probe polarization `<S_z>`.
    pub sz: f64,
    pub tau_mode: TauMode,
    /// Interaction time when `tau_mode = explicit`.
    pub tau: Option<f64>,
    /// Channel evaluation; defaults to `rotated_measurement` for
    /// `coherence` and `chi_norm` and `closed_form` otherwise.
    pub variant: Option<Variant>,
    /// Initial polar angle.
    pub theta0: f64,
    /// Initial azimuth for trajectories; bra angle `φ` for coherence and `χ`.
    pub phi0: f64,
    pub n_steps: usize,
    pub max_steps: usize,
    /// Defaults to `<scenario>.csv` (`.json` for audits).
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    /// Named thresholds; unknown names are rejected, missing ones take
    /// their defaults.
    pub tolerances: BTreeMap<String, f64>,
    /// `θ` values for coherence and the `θ` panel of `chi_norm`.
    pub theta_grid: Vec<f64>,
    /// `l` values for `purity_scan` and the `l` panel of `chi_norm`.
    pub ell_grid: Vec<f64>,
    /// `l` values swept by the audits.
    pub audit_ell_grid: Vec<f64>,
    /// Random states per audit point.
    pub n_random: usize,
    /// Write every density matrix of a trajectory to a binary side file.
    pub dump_density: bool,
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: Scenario::Trajectory,
            ell: 20.0,
            sz: 0.5,
            tau_mode: TauMode::PiOverD,
            tau: None,
            variant: None,
            theta0: 2.0 * PI / 3.0,
            phi0: 0.0,
            n_steps: 400,
            max_steps: DEFAULT_MAX_STEPS,
            output_path: None,
            seed: 0,
            tolerances: BTreeMap::new(),
            theta_grid: vec![PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI],
            ell_grid: vec![10.0, 20.0, 40.0],
            audit_ell_grid: vec![0.5, 1.0, 2.0, 5.0],
            n_random: 20,
            dump_density: false,
        }
    }
}

/// Known tolerance names with their defaults.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("closed_form", 1e-10),
    ("coefficients", 1e-9),
    ("rotated", 1e-10),
    ("choi_min_eigenvalue", 1e-10),
    ("choi_partial_trace", 1e-12),
    ("identity", 1e-13),
    ("trace_preservation", 1e-12),
    ("completeness", 1e-12),
    ("probability", 1e-12),
    ("povm_min_eigenvalue", 1e-10),
    ("coherence_threshold", 0.1),
    ("regime_r", 0.02),
    ("regime_rate", 0.1),
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        if let Some(v) = self.tolerances.get(name) {
            return *v;
        }
        DEFAULT_TOLERANCES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    pub fn variant(&self) -> Variant {
        self.variant.unwrap_or(match self.scenario {
            Scenario::Coherence | Scenario::ChiNorm => Variant::RotatedMeasurement,
            _ => Variant::ClosedForm,
        })
    }

    pub fn output_path(&self) -> PathBuf {
        self.output_path.clone().unwrap_or_else(|| {
            let ext = if self.scenario.is_audit() {
                "json"
            } else {
                "csv"
            };
            PathBuf::from(format!("{}.{ext}", self.scenario.name()))
        })
    }

    pub fn validate(&self) -> Result<()> {
        for name in self.tolerances.keys() {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return Err(Error::param("tolerances", format!("unknown name `{name}`")));
            }
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::param("tolerances", format!("`{name}` = {v}")));
            }
        }
        if self.n_steps > self.max_steps {
            return Err(Error::param(
                "n_steps",
                format!("{} exceeds max_steps = {}", self.n_steps, self.max_steps),
            ));
        }
        for (name, v) in [("theta0", self.theta0), ("phi0", self.phi0)] {
            if !v.is_finite() {
                return Err(Error::param(name, "not finite"));
            }
        }
        if self.theta_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("theta_grid", "not finite"));
        }
        SpinSystem::from_ell(self.ell)?;
        for &l in self.ell_grid.iter().chain(&self.audit_ell_grid) {
            SpinSystem::from_ell(l)?;
        }
        probe_state(self.sz)?;
        match (self.tau_mode, self.tau) {
            (TauMode::Explicit, None) => {
                return Err(Error::param("tau", "tau_mode = explicit needs a value"))
            }
            (TauMode::Explicit, Some(t)) if !(t.is_finite() && t >= 0.0) => {
                return Err(Error::param(
                    "tau",
                    format!("{t} is not a non-negative time"),
                ))
            }
            _ => {}
        }
        self.channel_config(self.ell)?;
        Ok(())
    }

    pub fn tau_for(&self, sys: SpinSystem) -> f64 {
        match self.tau_mode {
            TauMode::PiOverD => special_time(sys),
            TauMode::Explicit => self.tau.unwrap_or(0.0),
        }
    }

    pub fn channel_config(&self, ell: f64) -> Result<ChannelConfig> {
        let sys = SpinSystem::from_ell(ell)?;
        ChannelConfig::new(
            sys,
            probe_state(self.sz)?,
            self.tau_for(sys),
            self.variant(),
        )
    }

    pub fn channel(&self, ell: f64) -> Result<Channel> {
        Channel::new(self.channel_config(ell)?)
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub manifest: PathBuf,
    /// `false` only for audits with a failing check.
    pub passed: bool,
}

/// Validates `cfg`, runs its scenario and writes the output and manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let output = cfg.output_path();
    let (summary, extra_outputs, passed) = match cfg.scenario {
        Scenario::Trajectory | Scenario::CompareSemiclassical => {
            let r = run_trajectory(cfg, &output)?;
            (r.summary, r.extra_outputs, true)
        }
        Scenario::Coherence => (run_coherence(cfg, &output)?, vec![], true),
        Scenario::ChiNorm => (run_chi_norm(cfg, &output)?, vec![], true),
        Scenario::PurityScan => (run_purity_scan(cfg, &output)?, vec![], true),
        Scenario::ChannelAudit | Scenario::PovmAudit => {
            let report = run_audit(cfg)?;
            output::write_json(&output, &report)?;
            let passed = report.passed;
            (
                serde_json::to_value(report.summary()).unwrap(),
                vec![],
                passed,
            )
        }
    };
    let mut outputs = vec![output.clone()];
    outputs.extend(extra_outputs);
    let manifest = RunManifest {
        config: cfg.clone(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs,
        summary,
    };
    let manifest_file = manifest_path(&output);
    output::write_json(&manifest_file, &manifest)?;
    if !passed {
        return Err(Error::AuditFailed(format!(
            "{} reported failing checks, see {}",
            cfg.scenario.name(),
            output.display()
        )));
    }
    Ok(RunOutcome {
        output,
        manifest: manifest_file,
        passed,
    })
}
