use std::f64::consts::PI;

use gyroscope::channel::{special_time, Channel, ChannelConfig, Variant};
use gyroscope::estimators::{bloch_estimate, coherence_series, moment_set, purity};
use gyroscope::linalg::{self, CMatrix, C64};
use gyroscope::povm::induced_povm_general;
use gyroscope::semiclassical::{analytic_theta, integrate, SemiclassicalState};
use gyroscope::spin_algebra::{probe_state, DensityMatrix, SpinSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn channel(twice: u32, sz: f64, tau: f64, variant: Variant) -> Channel {
    let s = SpinSystem::from_twice_ell(twice).unwrap();
    Channel::new(ChannelConfig::new(s, probe_state(sz).unwrap(), tau, variant).unwrap()).unwrap()
}

fn general_operator(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_is_trace_and_hermiticity_preserving_and_positive(
        twice in 1u32..=12, tau in 0.0f64..2.0, sz in -0.5f64..=0.5, seed in any::<u64>()
    ) {
        let ch = channel(twice, sz, tau, Variant::ClosedForm);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = linalg::random_density_matrix(ch.dim(), &mut rng);
        let out = ch.apply(&rho).unwrap();
        prop_assert!((linalg::trace(&out) - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(linalg::hermiticity_residual(&out) < 1e-13);
        prop_assert!(linalg::min_eigenvalue(&out) > -1e-12);
        let p = purity(&out);
        prop_assert!(p <= 1.0 + 1e-12 && p >= 1.0 / ch.dim() as f64 - 1e-12);
    }

    #[test]
    fn channel_is_linear(
        twice in 1u32..=10, tau in 0.0f64..2.0, sz in -0.5f64..=0.5, seed in any::<u64>(),
        a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0)
    ) {
        let ch = channel(twice, sz, tau, Variant::ClosedForm);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = general_operator(ch.dim(), &mut rng);
        let y = general_operator(ch.dim(), &mut rng);
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let lhs = ch.apply(&(x.map(|z| z * a) + y.map(|z| z * b))).unwrap();
        let rhs = ch.apply(&x).unwrap().map(|z| z * a) + ch.apply(&y).unwrap().map(|z| z * b);
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn channel_commutes_with_rotations_about_z(
        twice in 1u32..=10, tau in 0.0f64..2.0, sz in -0.5f64..=0.5, phi in -PI..PI, seed in any::<u64>()
    ) {
        for variant in [Variant::Unitary, Variant::ClosedForm] {
            let ch = channel(twice, sz, tau, variant);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = linalg::random_density_matrix(ch.dim(), &mut rng);
            let r = ch.ops().rotation_z(phi);
            let lhs = ch.apply(&(&r * &rho * r.adjoint())).unwrap();
            let rhs = &r * ch.apply(&rho).unwrap() * r.adjoint();
            prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
        }
    }

    #[test]
    fn unpolarized_probes_leave_the_mixed_state_alone(twice in 1u32..=16, tau in 0.0f64..3.0) {
        let ch = channel(twice, 0.0, tau, Variant::ClosedForm);
        let mixed = DensityMatrix::maximally_mixed(ch.sys());
        prop_assert!(linalg::max_abs_diff(&ch.apply(mixed.matrix()).unwrap(), mixed.matrix()) < 1e-13);
    }

    #[test]
    fn measurement_forms_agree_in_every_frame(
        twice in 1u32..=10, sz in -0.5f64..=0.5, theta in -PI..PI, seed in any::<u64>()
    ) {
        let s = SpinSystem::from_twice_ell(twice).unwrap();
        let ch = channel(twice, sz, special_time(s), Variant::RotatedMeasurement);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = general_operator(ch.dim(), &mut rng);
        let a = ch.apply_rotated(&x, theta).unwrap();
        prop_assert!(linalg::max_abs_diff(&a, &ch.apply(&x).unwrap()) < 1e-11);
    }

    #[test]
    fn bloch_estimate_follows_rotations_about_y(
        twice in 2u32..=20, theta in 0.0f64..PI, alpha in -1.0f64..1.0, steps in 0usize..6, seed in any::<u64>()
    ) {
        let ch = channel(twice, 0.5, special_time(SpinSystem::from_twice_ell(twice).unwrap()), Variant::RotatedMeasurement);
        let mut rho = DensityMatrix::coherent(ch.sys(), theta).into_matrix();
        for _ in 0..steps {
            rho = ch.apply(&rho).unwrap();
        }
        let ry = ch.ops().rotation_y(alpha);
        let before = bloch_estimate(ch.ops(), &rho);
        let after = bloch_estimate(ch.ops(), &(&ry * &rho * ry.adjoint()));
        prop_assert!((after.r - before.r).abs() < 1e-10);
        let shift = (after.frame_angle() - before.frame_angle() - alpha).rem_euclid(2.0 * PI);
        prop_assert!(shift.min(2.0 * PI - shift) < 1e-10);

        // r is invariant for any state
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = linalg::random_density_matrix(ch.dim(), &mut rng);
        let b0 = bloch_estimate(ch.ops(), &sigma);
        let b1 = bloch_estimate(ch.ops(), &(&ry * &sigma * ry.adjoint()));
        prop_assert!((b0.r - b1.r).abs() < 1e-10);
    }

    #[test]
    fn second_moments_sum_to_casimir(twice in 1u32..=16, theta in -PI..PI, seed in any::<u64>()) {
        let s = SpinSystem::from_twice_ell(twice).unwrap();
        let ops = gyroscope::spin_algebra::SpinOperators::new(s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = linalg::random_density_matrix(s.dim(), &mut rng);
        let m = moment_set(&ops, &rho, theta);
        prop_assert!((m.xx + m.yy + m.zz - s.casimir()).abs() < 1e-10);
    }

    #[test]
    fn induced_povm_is_complete_and_positive(
        twice in 1u32..=10, tau in 0.0f64..2.0, sz in -0.5f64..=0.5,
        polar in 0.0f64..PI, azimuth in -PI..PI
    ) {
        let ch = channel(twice, sz, tau, Variant::Unitary);
        let u = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
        let p = induced_povm_general(u, &ch).unwrap();
        prop_assert!(p.completeness_residual() < 1e-12);
        prop_assert!(p.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn analytic_angle_law_composes(theta0 in 0.0f64..3.1, lam in -0.2f64..0.2, t1 in 0.0f64..50.0, t2 in 0.0f64..50.0) {
        let direct = analytic_theta(t1 + t2, theta0, lam).unwrap();
        let mid = analytic_theta(t1, theta0, lam).unwrap();
        prop_assert!((analytic_theta(t2, mid, lam).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn leading_equations_depend_on_time_only_through_lambda_t(
        theta0 in 0.1f64..3.0, r0 in 0.3f64..=1.0, sz in 0.05f64..0.25
    ) {
        let s = SpinSystem::from_twice_ell(20).unwrap();
        let slow = SemiclassicalState::new(s, probe_state(sz).unwrap(), r0, theta0).unwrap();
        let fast = SemiclassicalState::new(s, probe_state(2.0 * sz).unwrap(), r0, theta0).unwrap();
        let a = integrate(slow, 40, false).unwrap();
        let b = integrate(fast, 20, false).unwrap();
        for k in 0..=20 {
            prop_assert!((a[2 * k].r - b[k].r).abs() < 1e-5);
            prop_assert!((a[2 * k].theta - b[k].theta).abs() < 1e-5);
        }
    }
}

#[test]
fn coherence_magnitude_does_not_grow() {
    for twice in [10, 20, 40] {
        let s = SpinSystem::from_twice_ell(twice).unwrap();
        let ch = channel(twice, 0.5, special_time(s), Variant::RotatedMeasurement);
        for (theta, phi) in [
            (PI / 3.0, 0.0),
            (PI / 2.0, 0.0),
            (2.0 * PI / 3.0, 0.0),
            (PI, 0.0),
            (2.5, 1.0),
        ] {
            let series = coherence_series(&ch, theta, phi, 50).unwrap();
            for w in series.windows(2) {
                assert!(
                    w[1].norm() <= w[0].norm() + 1e-12,
                    "l={} θ={theta} φ={phi}",
                    twice / 2
                );
            }
        }
    }
}

#[test]
fn fixed_point_purity_stays_one() {
    let s = SpinSystem::from_twice_ell(20).unwrap();
    let ch = channel(20, 0.5, special_time(s), Variant::ClosedForm);
    let traj = ch
        .iterate(&DensityMatrix::coherent(s, 0.0), 50, false)
        .unwrap();
    assert!(traj.purities().iter().all(|p| (p - 1.0).abs() < 1e-12));
}
