//! Trace norm of the residual χ left after the evolved off-diagonal operator
//! is matched to a rescaled coherent-state dyad.
//!
//! cargo run --example residual_chi

use std::f64::consts::PI;

use gyroscope::channel::{Channel, ChannelConfig, Variant};
use gyroscope::estimators::{chi_series, residual_chi};
use gyroscope::spin_algebra::{probe_state, SpinSystem};

fn measurement(ell: f64) -> gyroscope::Result<Channel> {
    Channel::new(ChannelConfig::at_special_time(
        SpinSystem::from_ell(ell)?,
        probe_state(0.5)?,
        Variant::RotatedMeasurement,
    ))
}

fn main() -> gyroscope::Result<()> {
    let theta = PI / 3.0;
    println!("one step from |π/3><0|");
    for ell in [10.0, 20.0, 40.0] {
        let n = residual_chi(&measurement(ell)?, theta, 0.0)?.norms;
        println!(
            "  l={ell:>4}  advanced angles {:.4e}  fixed angles {:.4e}  Bloch angles {:.4e}",
            n.semiclassical, n.literal, n.bloch
        );
    }
    println!("l=20, per step");
    for (k, n) in chi_series(&measurement(20.0)?, theta, 0.0, 20)?
        .iter()
        .enumerate()
    {
        println!(
            "  {k:>3}  {:.4e}  {:.4e}  {:.4e}",
            n.semiclassical, n.literal, n.bloch
        );
    }
    Ok(())
}
