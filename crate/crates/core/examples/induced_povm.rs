//! The two-outcome measurement induced on the gyroscope by measuring the
//! outgoing probe along u, from the trace formula and from the closed form.
//!
//! cargo run --example induced_povm

use std::f64::consts::FRAC_1_SQRT_2;

use gyroscope::channel::{Channel, ChannelConfig, Variant};
use gyroscope::linalg;
use gyroscope::povm::{
    induced_povm_closed_form, induced_povm_general, outcome_probabilities, span_projection,
    Prefactor,
};
use gyroscope::spin_algebra::{probe_state, DensityMatrix, SpinSystem};

fn main() -> gyroscope::Result<()> {
    let axes = [
        ("x", [1.0, 0.0, 0.0]),
        ("z", [0.0, 0.0, 1.0]),
        ("xz", [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]),
    ];
    for ell in [0.5, 2.0, 5.0] {
        let sys = SpinSystem::from_ell(ell)?;
        let ch = Channel::new(ChannelConfig::at_special_time(
            sys,
            probe_state(0.5)?,
            Variant::Unitary,
        ))?;
        let rho = DensityMatrix::coherent(sys, 1.0);
        for (name, u) in axes {
            let general = induced_povm_general(u, &ch)?;
            let closed = induced_povm_closed_form(u, &ch, Prefactor::Full)?;
            let (p, _) = general.probabilities(rho.matrix());
            let (q, _) = outcome_probabilities(rho.matrix(), u, &ch)?;
            let (c, _) = closed.probabilities(rho.matrix());
            let diff = &general.lambda_plus - &general.lambda_minus;
            println!(
                "l={ell:>3} u={name:<2}  P(+) general {p:.6}  simulated {q:.6}  closed {c:.6}  |Λ+ closed - general| {:.3e}  outside span(I,L) {:.3e}",
                linalg::max_abs_diff(&closed.lambda_plus, &general.lambda_plus),
                span_projection(&diff, ch.ops()).residual,
            );
        }
    }
    Ok(())
}
