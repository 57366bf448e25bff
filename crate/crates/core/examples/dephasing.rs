//! Decay of the coherence <θ|E^n(|θ><φ|)|φ> between two coherent states,
//! against the leading per-step factor cos²((θ-φ)/2).
//!
//! cargo run --example dephasing

use std::f64::consts::PI;

use gyroscope::channel::{Channel, ChannelConfig, Variant};
use gyroscope::estimators::{coherence_series, off_diagonal_formula};
use gyroscope::spin_algebra::{probe_state, SpinSystem};

fn main() -> gyroscope::Result<()> {
    let sys = SpinSystem::from_ell(20.0)?;
    let ch = Channel::new(ChannelConfig::at_special_time(
        sys,
        probe_state(0.5)?,
        Variant::RotatedMeasurement,
    ))?;
    let phi = 0.0;
    for theta in [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, PI] {
        let series = coherence_series(&ch, theta, phi, 12)?;
        let lead = ((theta - phi) / 2.0).cos().powi(2);
        let below = series.iter().position(|c| c.norm() < 0.1);
        println!(
            "theta={theta:.4}  one step: {:.5} (formula {:.5}, leading {lead:.5})  below 0.1 after {below:?} steps",
            series[1].norm(),
            off_diagonal_formula(sys, 0.5, theta, phi),
        );
        let row: Vec<String> = series.iter().map(|c| format!("{:.4}", c.norm())).collect();
        println!("  |coherence|: {}", row.join(" "));
    }
    Ok(())
}
