//! Relaxation of a coherent state toward the probe polarization, compared
//! with the leading and corrected semiclassical equations. Prints every
//! 20th step and the detected regime boundaries.
//!
//! cargo run --example relaxation -- [ell] [theta0]

use std::f64::consts::PI;

use gyroscope::channel::{Channel, ChannelConfig, Variant};
use gyroscope::semiclassical::{
    analytic_theta, integrate, regime_detect, RegimeThresholds, SemiclassicalState,
};
use gyroscope::spin_algebra::{probe_state, DensityMatrix, SpinSystem};

fn main() -> gyroscope::Result<()> {
    let mut args = std::env::args().skip(1);
    let ell: f64 = args.next().map_or(20.0, |s| s.parse().expect("ell"));
    let theta0: f64 = args.next().map_or(PI - 0.2, |s| s.parse().expect("theta0"));
    let n = 400;

    let sys = SpinSystem::from_ell(ell)?;
    let probe = probe_state(0.5)?;
    let ch = Channel::new(ChannelConfig::at_special_time(
        sys,
        probe,
        Variant::ClosedForm,
    ))?;
    let traj = ch.iterate(&DensityMatrix::coherent(sys, theta0), n, false)?;

    let start = SemiclassicalState::new(sys, probe, 1.0, theta0)?;
    let leading = integrate(start, n, false)?;
    let corrected = integrate(start, n, true)?;
    let lambda = start.lambda();

    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "step", "r", "r_lead", "r_corr", "theta", "theta_an"
    );
    for rec in traj.records.iter().step_by(20) {
        let t = rec.step;
        println!(
            "{t:>5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            rec.bloch.r,
            leading[t].r,
            corrected[t].r,
            rec.bloch.theta().unwrap_or(f64::NAN),
            analytic_theta(t as f64, theta0, lambda).unwrap_or(f64::NAN),
        );
    }

    let thetas: Vec<f64> = traj
        .polar_angles()
        .into_iter()
        .map(|t| t.unwrap_or(0.0))
        .collect();
    let regimes = regime_detect(
        &traj.polarizations(),
        &thetas,
        sys,
        probe,
        RegimeThresholds::default(),
    )?;
    println!(
        "regimes: t1={:?} t2={:?} t3={:?}",
        regimes.t1, regimes.t2, regimes.t3
    );
    Ok(())
}
