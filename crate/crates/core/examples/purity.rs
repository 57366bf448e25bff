//! Depolarization ε = 1 - r against 1/(d Tr ρ²) along relaxation runs.
//!
//! cargo run --example purity -- [theta0]

use std::f64::consts::PI;

use gyroscope::channel::{Channel, ChannelConfig, Variant};
use gyroscope::spin_algebra::{probe_state, DensityMatrix, SpinSystem};

fn main() -> gyroscope::Result<()> {
    let theta0: f64 = std::env::args()
        .nth(1)
        .map_or(PI - 0.2, |s| s.parse().expect("theta0"));
    for ell in [10.0, 20.0, 40.0] {
        let sys = SpinSystem::from_ell(ell)?;
        let ch = Channel::new(ChannelConfig::at_special_time(
            sys,
            probe_state(0.5)?,
            Variant::ClosedForm,
        ))?;
        let traj = ch.iterate(&DensityMatrix::coherent(sys, theta0), 250, false)?;
        let d = sys.dim() as f64;
        let peak = traj
            .records
            .iter()
            .max_by(|a, b| a.bloch.epsilon().total_cmp(&b.bloch.epsilon()))
            .unwrap();
        println!(
            "l={ell}: peak ε = {:.4} at step {}",
            peak.bloch.epsilon(),
            peak.step
        );
        for rec in traj
            .records
            .iter()
            .step_by(10)
            .take_while(|r| r.step <= peak.step)
        {
            let eps = rec.bloch.epsilon();
            println!(
                "  {:>4}  ε={eps:.4}  1/(dTrρ²)={:.4}",
                rec.step,
                1.0 / (d * rec.purity)
            );
        }
    }
    Ok(())
}
