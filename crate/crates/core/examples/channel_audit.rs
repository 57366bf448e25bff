//! Cross-checks the three channel evaluations and certifies complete
//! positivity through the Choi matrix.
//!
//! cargo run --example channel_audit

use gyroscope::channel::{special_time, Channel, ChannelConfig, Variant};
use gyroscope::linalg;
use gyroscope::spin_algebra::{probe_state, SpinSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> gyroscope::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!(
        "{:>5} {:>8} {:>5} {:>12} {:>12} {:>12} {:>12}",
        "l", "tau", "sz", "closed-unit", "rotated-meas", "choi min", "choi TrOut"
    );
    for twice in [1, 2, 4, 10] {
        let sys = SpinSystem::from_twice_ell(twice)?;
        for tau in [special_time(sys), 0.3] {
            for sz in [0.0, 0.25, 0.5] {
                let ch = Channel::new(ChannelConfig::new(
                    sys,
                    probe_state(sz)?,
                    tau,
                    Variant::Unitary,
                )?)?;
                let rho = linalg::random_density_matrix(sys.dim(), &mut rng);
                let closed =
                    linalg::max_abs_diff(&ch.apply_unitary(&rho)?, &ch.apply_closed_form(&rho)?);
                let rotated = if ch.config().is_special_time() {
                    let r = ch.apply_rotated(&rho, 1.1)?;
                    format!(
                        "{:.2e}",
                        linalg::max_abs_diff(&r, &ch.apply_measurement(&rho)?)
                    )
                } else {
                    "-".into()
                };
                let choi = ch.choi()?;
                println!(
                    "{:>5} {:>8.4} {:>5} {:>12.2e} {:>12} {:>12.2e} {:>12.2e}",
                    sys.ell(),
                    tau,
                    sz,
                    closed,
                    rotated,
                    choi.min_eigenvalue,
                    choi.partial_trace_residual
                );
            }
        }
    }
    Ok(())
}
