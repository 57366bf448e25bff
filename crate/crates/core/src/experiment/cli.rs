//! Command-line front end: one subcommand per scenario, each accepting
//! `--config <path>` plus a flag for every config field.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{run, ExperimentConfig, Scenario, TauMode};
use crate::channel::Variant;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "gyro",
    version,
    about = "Quantum gyroscope collision-model runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[command(rename_all = "snake_case")]
pub enum Command {
    /// Brute-force trajectory of the Bloch vector and purity.
    Trajectory(Overrides),
    /// Trajectory with leading and corrected semiclassical predictions.
    CompareSemiclassical(Overrides),
    /// Decay of <θ|E^n(|θ><φ|)|φ> over a grid of θ.
    Coherence(Overrides),
    /// Trace norm of the residual χ over l and θ sweeps.
    ChiNorm(Overrides),
    /// Depolarization against inverse scaled purity over a grid of l.
    PurityScan(Overrides),
    /// Induced POVM: general formula, closed form, direct probabilities.
    PovmAudit(Overrides),
    /// Channel forms, Choi matrix and trace preservation.
    ChannelAudit(Overrides),
}

impl Command {
    pub fn split(&self) -> (Scenario, &Overrides) {
        match self {
            Command::Trajectory(o) => (Scenario::Trajectory, o),
            Command::CompareSemiclassical(o) => (Scenario::CompareSemiclassical, o),
            Command::Coherence(o) => (Scenario::Coherence, o),
            Command::ChiNorm(o) => (Scenario::ChiNorm, o),
            Command::PurityScan(o) => (Scenario::PurityScan, o),
            Command::PovmAudit(o) => (Scenario::PovmAudit, o),
            Command::ChannelAudit(o) => (Scenario::ChannelAudit, o),
        }
    }
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| "expected unitary, closed_form or rotated_measurement".to_string())
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    let value = value.parse().map_err(|e| format!("{e}"))?;
    Ok((name.to_string(), value))
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (CSV, or JSON for audits).
    #[arg(long, alias = "output_path")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub sz: Option<f64>,
    #[arg(long, alias = "tau_mode", value_enum)]
    pub tau_mode: Option<TauMode>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi0: Option<f64>,
    #[arg(long, alias = "n_steps")]
    pub n_steps: Option<usize>,
    #[arg(long, alias = "max_steps")]
    pub max_steps: Option<usize>,
    /// Comma-separated angles.
    #[arg(
        long,
        alias = "theta_grid",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub theta_grid: Option<Vec<f64>>,
    /// Comma-separated spins.
    #[arg(long, alias = "ell_grid", value_delimiter = ',')]
    pub ell_grid: Option<Vec<f64>>,
    #[arg(long, alias = "audit_ell_grid", value_delimiter = ',')]
    pub audit_ell_grid: Option<Vec<f64>>,
    #[arg(long, alias = "n_random")]
    pub n_random: Option<usize>,
    #[arg(long, alias = "dump_density")]
    pub dump_density: bool,
    /// `name=value`, repeatable.
    #[arg(long = "tolerance", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            seed,
            ell,
            sz,
            tau_mode,
            theta0,
            phi0,
            n_steps,
            max_steps,
            theta_grid,
            ell_grid,
            audit_ell_grid,
            n_random
        );
        if self.out.is_some() {
            cfg.output_path = self.out.clone();
        }
        if self.tau.is_some() {
            cfg.tau = self.tau;
        }
        if self.variant.is_some() {
            cfg.variant = self.variant;
        }
        cfg.dump_density |= self.dump_density;
        cfg.tolerances.extend(self.tolerances.iter().cloned());
    }
}

/// Config file (if any), then the subcommand's scenario, then flags.
pub fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let (scenario, overrides) = cli.command.split();
    let mut cfg = match &overrides.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.scenario = scenario;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match build_config(&cli).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => {
            println!("{}", outcome.output.display());
            println!("{}", outcome.manifest.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
