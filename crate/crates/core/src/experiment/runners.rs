use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::output::{fmt, fmt_opt, write_density_dump, CsvTable};
use super::{ExperimentConfig, Scenario};
use crate::error::Result;
use crate::estimators::{chi_series, coherence_series};
use crate::semiclassical::{
    integrate, regime_detect, RegimeThresholds, Regimes, SemiclassicalState,
};
use crate::spin_algebra::{coherent_state, probe_state, DensityMatrix, SpinSystem};

pub struct TrajectoryRun {
    pub summary: serde_json::Value,
    pub extra_outputs: Vec<PathBuf>,
}

/// Semiclassical path from `state0`, cut short at the first breakdown.
fn semiclassical_path(
    state0: SemiclassicalState,
    n: usize,
    corrections: bool,
) -> (Vec<SemiclassicalState>, Option<usize>) {
    let mut path = vec![state0];
    for step in 1..=n {
        match integrate(*path.last().unwrap(), 1, corrections) {
            Ok(mut next) => path.push(next.pop().unwrap()),
            Err(_) => return (path, Some(step)),
        }
    }
    (path, None)
}

fn initial_state(cfg: &ExperimentConfig, sys: SpinSystem) -> Result<DensityMatrix> {
    let ops = crate::spin_algebra::SpinOperators::new(sys);
    let psi = ops.rotation_z(cfg.phi0) * coherent_state(sys, cfg.theta0);
    DensityMatrix::from_pure(&psi)
}

#[derive(Serialize)]
struct SemiclassicalSummary {
    leading_breakdown_step: Option<usize>,
    corrected_breakdown_step: Option<usize>,
    regimes: Regimes,
    thresholds: RegimeThresholds,
}

/// One row per collision: `step, Lx, Ly, Lz, r, theta, phi_az, purity`,
/// plus `r_leading, theta_leading, r_corrected, theta_corrected` for
/// `compare_semiclassical`.
pub fn run_trajectory(cfg: &ExperimentConfig, output: &Path) -> Result<TrajectoryRun> {
    let channel = cfg.channel(cfg.ell)?;
    let sys = channel.sys();
    let rho0 = initial_state(cfg, sys)?;
    let traj = channel.iterate(&rho0, cfg.n_steps, cfg.dump_density)?;
    let compare = cfg.scenario == Scenario::CompareSemiclassical;

    let mut header = vec!["step", "Lx", "Ly", "Lz", "r", "theta", "phi_az", "purity"];
    let mut semi = None;
    if compare {
        header.extend([
            "r_leading",
            "theta_leading",
            "r_corrected",
            "theta_corrected",
        ]);
        let probe = probe_state(cfg.sz)?;
        let start = SemiclassicalState::new(sys, probe, 1.0, cfg.theta0)?;
        semi = Some((
            semiclassical_path(start, cfg.n_steps, false),
            semiclassical_path(start, cfg.n_steps, true),
        ));
    }

    let mut table = CsvTable::create(output, &header)?;
    for rec in &traj.records {
        let b = &rec.bloch;
        let mut row = vec![
            rec.step.to_string(),
            fmt(b.lx),
            fmt(b.ly),
            fmt(b.lz),
            fmt(b.r),
            fmt_opt(b.theta()),
            fmt_opt(b.phi_az()),
            fmt(rec.purity),
        ];
        if let Some(((lead, _), (corr, _))) = &semi {
            for path in [lead, corr] {
                let s = path.get(rec.step);
                row.push(fmt_opt(s.map(|s| s.r)));
                row.push(fmt_opt(s.map(|s| s.theta)));
            }
        }
        table.row(&row)?;
    }
    table.finish()?;

    let mut extra_outputs = Vec::new();
    if cfg.dump_density {
        let mats: Vec<_> = traj.records.iter().filter_map(|r| r.rho.clone()).collect();
        let (bin, json) = write_density_dump(output, &mats)?;
        extra_outputs.extend([bin, json]);
    }

    let rs = traj.polarizations();
    let (min_step, min_r) =
        rs.iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, r)| if r < acc.1 { (i, r) } else { acc },
            );
    let last = traj.records.last().map(|r| r.bloch);
    let mut summary = json!({
        "n_steps": cfg.n_steps,
        "min_r": min_r,
        "min_r_step": min_step,
        "final_r": last.map(|b| b.r),
        "final_theta": last.and_then(|b| b.theta()),
    });
    if let Some(((_, lead_break), (_, corr_break))) = semi {
        let thresholds = RegimeThresholds {
            r_tolerance: cfg.tolerance("regime_r"),
            rate_tolerance: cfg.tolerance("regime_rate"),
        };
        let thetas: Option<Vec<f64>> = traj.polar_angles().into_iter().collect();
        let regimes = match thetas {
            Some(th) => regime_detect(&rs, &th, sys, probe_state(cfg.sz)?, thresholds)?,
            None => Regimes::default(),
        };
        summary["semiclassical"] = serde_json::to_value(SemiclassicalSummary {
            leading_breakdown_step: lead_break,
            corrected_breakdown_step: corr_break,
            regimes,
            thresholds,
        })
        .unwrap();
    }
    Ok(TrajectoryRun {
        summary,
        extra_outputs,
    })
}

/// `step, theta, phi, coherence_abs, predicted_leading` for every `θ` of
/// the grid, with `predicted_leading = cos²((θ-φ)/2)^step`.
pub fn run_coherence(cfg: &ExperimentConfig, output: &Path) -> Result<serde_json::Value> {
    let channel = cfg.channel(cfg.ell)?;
    let threshold = cfg.tolerance("coherence_threshold");
    let phi = cfg.phi0;
    let mut table = CsvTable::create(
        output,
        &["step", "theta", "phi", "coherence_abs", "predicted_leading"],
    )?;
    let mut per_theta = Vec::new();
    for &theta in &cfg.theta_grid {
        let series = coherence_series(&channel, theta, phi, cfg.n_steps)?;
        let factor = ((theta - phi) / 2.0).cos().powi(2);
        for (k, c) in series.iter().enumerate() {
            table.row([
                k.to_string(),
                fmt(theta),
                fmt(phi),
                fmt(c.norm()),
                fmt(factor.powi(k as i32)),
            ])?;
        }
        let below = series.iter().position(|c| c.norm() <= threshold);
        per_theta.push(json!({
            "theta": theta,
            "steps_below_threshold": below,
            "predicted_steps": threshold.ln() / factor.ln(),
        }));
    }
    table.finish()?;
    Ok(json!({ "phi": phi, "threshold": threshold, "per_theta": per_theta }))
}

/// Trace norms of `χ` along iterated coherences, in two panels: `ell`
/// (`θ = theta0`, `l` over `ell_grid`) and `theta` (`l = ell`, `θ` over
/// `theta_grid`).
pub fn run_chi_norm(cfg: &ExperimentConfig, output: &Path) -> Result<serde_json::Value> {
    let mut table = CsvTable::create(
        output,
        &[
            "panel",
            "step",
            "ell",
            "theta",
            "chi_semiclassical",
            "chi_literal",
            "chi_bloch",
        ],
    )?;
    let mut points: Vec<(&str, f64, f64)> = Vec::new();
    points.extend(cfg.ell_grid.iter().map(|&l| ("ell", l, cfg.theta0)));
    points.extend(cfg.theta_grid.iter().map(|&t| ("theta", cfg.ell, t)));
    let mut first_step = Vec::new();
    for (panel, ell, theta) in points {
        let channel = cfg.channel(ell)?;
        let norms = chi_series(&channel, theta, cfg.phi0, cfg.n_steps)?;
        for (k, n) in norms.iter().enumerate() {
            table.row([
                panel.to_string(),
                k.to_string(),
                fmt(ell),
                fmt(theta),
                fmt(n.semiclassical),
                fmt(n.literal),
                fmt(n.bloch),
            ])?;
        }
        first_step.push(json!({
            "panel": panel,
            "ell": ell,
            "theta": theta,
            "step0": norms.first(),
            "last": norms.last(),
        }));
    }
    table.finish()?;
    Ok(json!({ "phi": cfg.phi0, "series": first_step }))
}

/// `step, ell, epsilon, inv_d_purity, purity` for every `l` of the grid.
pub fn run_purity_scan(cfg: &ExperimentConfig, output: &Path) -> Result<serde_json::Value> {
    let mut table = CsvTable::create(
        output,
        &["step", "ell", "epsilon", "inv_d_purity", "purity"],
    )?;
    let mut per_ell = Vec::new();
    for &ell in &cfg.ell_grid {
        let channel = cfg.channel(ell)?;
        let rho0 = initial_state(cfg, channel.sys())?;
        let traj = channel.iterate(&rho0, cfg.n_steps, false)?;
        let d = channel.dim() as f64;
        let mut peak = (0, f64::NEG_INFINITY);
        for rec in &traj.records {
            let eps = rec.bloch.epsilon();
            if eps > peak.1 {
                peak = (rec.step, eps);
            }
            table.row([
                rec.step.to_string(),
                fmt(ell),
                fmt(eps),
                fmt(1.0 / (d * rec.purity)),
                fmt(rec.purity),
            ])?;
        }
        let max_rel = traj.records[1..=peak.0.max(1).min(traj.len() - 1)]
            .iter()
            .filter(|r| r.bloch.epsilon() > 0.0)
            .map(|r| ((1.0 / (d * r.purity)) - r.bloch.epsilon()).abs() / r.bloch.epsilon())
            .fold(0.0, f64::max);
        per_ell.push(json!({
            "ell": ell,
            "peak_epsilon": peak.1,
            "peak_step": peak.0,
            "max_relative_deviation_before_peak": max_rel,
        }));
    }
    table.finish()?;
    Ok(json!({ "theta0": cfg.theta0, "per_ell": per_ell }))
}
