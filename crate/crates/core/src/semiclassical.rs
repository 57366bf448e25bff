//! Mean-field equations for the Bloch vector `(r, θ)` under repeated
//! collisions at `τ = π/d`, with one unit of time per collision.
//!
//! Leading order, `λ = <S_z>/l`:
//!
//! ```text
//! dr/dt = λ (1 - r²) cos θ
//! dθ/dt = -λ (1 + r²) / (2r) sin θ
//! ```
//!
//! The corrected rate adds `-(1 + <S_z>²)/(2l²) r - (λ²/2) sin²θ r³` to
//! `dr/dt` and is only meant for `θ > π/2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin_algebra::{ProbeState, SpinSystem};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiclassicalState {
    pub r: f64,
    pub theta: f64,
    pub sys: SpinSystem,
    pub sz: f64,
}

impl SemiclassicalState {
    pub fn new(sys: SpinSystem, probe: ProbeState, r: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::param("r", format!("{r} outside [0, 1]")));
        }
        if !theta.is_finite() {
            return Err(Error::param("theta", "not finite"));
        }
        Ok(SemiclassicalState {
            r,
            theta,
            sys,
            sz: probe.sz(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.sz / self.sys.ell()
    }

    pub fn epsilon(&self) -> f64 {
        1.0 - self.r
    }

    fn with(&self, r: f64, theta: f64) -> Self {
        SemiclassicalState { r, theta, ..*self }
    }
}

/// `(dr/dt, dθ/dt)` at leading order. The angle equation is singular at
/// `r = 0`.
pub fn rhs_leading(state: &SemiclassicalState) -> Result<(f64, f64)> {
    if state.r <= 0.0 {
        return Err(Error::param("r", "dθ/dt is singular at r = 0"));
    }
    let lam = state.lambda();
    let (s, c) = state.theta.sin_cos();
    let r2 = state.r * state.r;
    Ok((
        lam * (1.0 - r2) * c,
        -lam * (1.0 + r2) / (2.0 * state.r) * s,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedRate {
    pub r_dot: f64,
    pub theta_dot: f64,
    /// `θ > π/2`, where the correction terms are meaningful.
    pub within_validity: bool,
}

pub fn rhs_corrected(state: &SemiclassicalState) -> Result<CorrectedRate> {
    let (r_dot, theta_dot) = rhs_leading(state)?;
    let l = state.sys.ell();
    let lam = state.lambda();
    let r = state.r;
    let extra = -(1.0 + state.sz * state.sz) / (2.0 * l * l) * r
        - 0.5 * lam * lam * state.theta.sin().powi(2) * r.powi(3);
    Ok(CorrectedRate {
        r_dot: r_dot + extra,
        theta_dot,
        within_validity: state.theta > PI / 2.0,
    })
}

/// `π - θ` below which each unit step is split into four.
pub const POLE_REFINEMENT: f64 = 0.3;
/// How far `r` may leave `[0, 1]` before the model is declared broken.
pub const R_ESCAPE_TOL: f64 = 1e-6;

/// RK4 with unit steps; returns `n_steps + 1` states starting with `state0`.
pub fn integrate(
    state0: SemiclassicalState,
    n_steps: usize,
    corrections: bool,
) -> Result<Vec<SemiclassicalState>> {
    let f = |s: &SemiclassicalState| -> Result<(f64, f64)> {
        if corrections {
            rhs_corrected(s).map(|c| (c.r_dot, c.theta_dot))
        } else {
            rhs_leading(s)
        }
    };
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(state0);
    let mut cur = state0;
    for step in 1..=n_steps {
        let sub = if PI - cur.theta.abs() < POLE_REFINEMENT {
            4
        } else {
            1
        };
        let h = 1.0 / sub as f64;
        for _ in 0..sub {
            let broken = |_| Error::ModelBreakdown { step, r: cur.r };
            let k1 = f(&cur).map_err(broken)?;
            let k2 =
                f(&cur.with(cur.r + 0.5 * h * k1.0, cur.theta + 0.5 * h * k1.1)).map_err(broken)?;
            let k3 =
                f(&cur.with(cur.r + 0.5 * h * k2.0, cur.theta + 0.5 * h * k2.1)).map_err(broken)?;
            let k4 = f(&cur.with(cur.r + h * k3.0, cur.theta + h * k3.1)).map_err(broken)?;
            let r = cur.r + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            let theta = cur.theta + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            if !(r.is_finite() && (-R_ESCAPE_TOL..=1.0 + R_ESCAPE_TOL).contains(&r)) {
                return Err(Error::ModelBreakdown { step, r });
            }
            cur = cur.with(r.clamp(0.0, 1.0), theta);
        }
        out.push(cur);
    }
    Ok(out)
}

/// `tan(θ(t)/2) = e^{-λt} tan(θ0/2)` for `θ0 ∈ [0, π)`.
pub fn analytic_theta(t: f64, theta0: f64, lambda: f64) -> Result<f64> {
    if !(0.0..PI).contains(&theta0) {
        return Err(Error::param(
            "theta0",
            format!("{theta0} outside [0, pi); pi is an unstable fixed point"),
        ));
    }
    Ok(2.0 * ((-lambda * t).exp() * (theta0 / 2.0).tan()).atan())
}

/// `θ0` whose analytic trajectory passes through `theta_t` at time `t`.
pub fn equivalent_initial_angle(t: f64, theta_t: f64, lambda: f64) -> f64 {
    2.0 * ((lambda * t).exp() * (theta_t / 2.0).tan()).atan()
}

/// Depolarization along the analytic angle trajectory, anchored at
/// `ε(τ_ref) = eps_ref`:
/// `ε(t) = ε(τ) (cosh λτ + cos θ0 sinh λτ)² / (cosh λt + cos θ0 sinh λt)²`.
pub fn analytic_epsilon(t: f64, tau_ref: f64, eps_ref: f64, theta0: f64, lambda: f64) -> f64 {
    let g = |x: f64| (lambda * x).cosh() + theta0.cos() * (lambda * x).sinh();
    eps_ref * (g(tau_ref) / g(t)).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// Absolute tolerance on `r` (and `ε`).
    pub r_tolerance: f64,
    /// Relative tolerance on the per-step change of `r`.
    pub rate_tolerance: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            r_tolerance: 0.02,
            rate_tolerance: 0.1,
        }
    }
}

/// Step indices separating the relaxation regimes.
///
/// * `t1`: first step where the observed `Δr` agrees with the corrected
///   rate to `rate_tolerance`.
/// * `t2`: first later step where the corrected equations, started from the
///   observed state at `t1`, are off by more than `r_tolerance`.
/// * `t3`: first step `≥ t2` from which the analytic `ε` law, anchored at
///   that step, stays within `r_tolerance` for the rest of the run.
///
/// All are `None` when the run never depolarizes by more than
/// `r_tolerance`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Regimes {
    pub t1: Option<usize>,
    pub t2: Option<usize>,
    pub t3: Option<usize>,
}

impl Regimes {
    pub fn found(&self) -> bool {
        self.t1.is_some()
    }
}

pub fn regime_detect(
    r: &[f64],
    theta: &[f64],
    sys: SpinSystem,
    probe: ProbeState,
    thresholds: RegimeThresholds,
) -> Result<Regimes> {
    if r.len() != theta.len() {
        return Err(Error::param(
            "theta",
            format!("{} angles for {} polarizations", theta.len(), r.len()),
        ));
    }
    let n = r.len();
    let max_eps = r.iter().map(|x| 1.0 - x).fold(0.0, f64::max);
    if n < 3 || max_eps < thresholds.r_tolerance {
        return Ok(Regimes::default());
    }

    let mut t1 = None;
    for t in 0..n - 1 {
        let state = SemiclassicalState::new(sys, probe, r[t].clamp(0.0, 1.0), theta[t])?;
        let Ok(rate) = rhs_corrected(&state) else {
            continue;
        };
        let dr = r[t + 1] - r[t];
        if (dr - rate.r_dot).abs() <= thresholds.rate_tolerance * dr.abs() {
            t1 = Some(t);
            break;
        }
    }
    let Some(t1) = t1 else {
        return Ok(Regimes::default());
    };

    let start = SemiclassicalState::new(sys, probe, r[t1].clamp(0.0, 1.0), theta[t1])?;
    let t2 = match integrate(start, n - 1 - t1, true) {
        Ok(path) => (1..path.len())
            .find(|&k| (path[k].r - r[t1 + k]).abs() > thresholds.r_tolerance)
            .map(|k| t1 + k),
        Err(Error::ModelBreakdown { step, .. }) => Some(t1 + step),
        Err(e) => return Err(e),
    };

    let lam = probe.sz() / sys.ell();
    let t3 = t2.and_then(|t2| {
        (t2..n).find(|&t| {
            let theta0 = equivalent_initial_angle(t as f64, theta[t], lam);
            let eps_t = 1.0 - r[t];
            (t..n).all(|s| {
                let predicted = analytic_epsilon(s as f64, t as f64, eps_t, theta0, lam);
                (predicted - (1.0 - r[s])).abs() <= thresholds.r_tolerance
            })
        })
    });

    Ok(Regimes {
        t1: Some(t1),
        t2,
        t3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::probe_state;

    fn state(two_l: u32, sz: f64, r: f64, theta: f64) -> SemiclassicalState {
        SemiclassicalState::new(
            SpinSystem::from_twice_ell(two_l).unwrap(),
            probe_state(sz).unwrap(),
            r,
            theta,
        )
        .unwrap()
    }

    #[test]
    fn leading_rates() {
        // l = 20, sz = 1/2, r = 1, θ = π/2: dr = 0, dθ = -λ
        let (dr, dth) = rhs_leading(&state(40, 0.5, 1.0, PI / 2.0)).unwrap();
        assert_eq!(dr, 0.0);
        assert!((dth + 0.025).abs() < 1e-15);
        // r = 0.5, θ = 0: dr = 3λ/4
        let (dr, dth) = rhs_leading(&state(40, 0.5, 0.5, 0.0)).unwrap();
        assert!((dr - 0.75 * 0.025).abs() < 1e-15);
        assert_eq!(dth, 0.0);
        assert!(rhs_leading(&state(40, 0.5, 0.0, 1.0)).is_err());
    }

    #[test]
    fn corrected_rate_at_the_south_pole() {
        let s = state(40, 0.5, 1.0, PI);
        let c = rhs_corrected(&s).unwrap();
        // -(1 + 1/4)/(2·400)
        assert!((c.r_dot + 1.25 / 800.0).abs() < 1e-15);
        assert!(c.within_validity);
        assert!(
            !rhs_corrected(&state(40, 0.5, 1.0, 1.0))
                .unwrap()
                .within_validity
        );
    }

    #[test]
    fn integration_tracks_analytic_angle() {
        let s0 = state(40, 0.5, 1.0, PI / 3.0);
        let path = integrate(s0, 100, false).unwrap();
        for (t, s) in path.iter().enumerate() {
            assert_eq!(s.r, 1.0);
            let want = analytic_theta(t as f64, PI / 3.0, s0.lambda()).unwrap();
            assert!((s.theta - want).abs() < 1e-7, "{t}: {}", s.theta - want);
        }
    }

    #[test]
    fn analytic_theta_examples() {
        assert_eq!(analytic_theta(0.0, 1.0, 0.1).unwrap(), 1.0);
        let th = analytic_theta(10.0, PI / 2.0, 0.1).unwrap();
        assert!((th - 2.0 * (-1.0f64).exp().atan()).abs() < 1e-15);
        assert!(analytic_theta(1.0, PI, 0.1).is_err());
        let back = equivalent_initial_angle(10.0, th, 0.1);
        assert!((back - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn analytic_epsilon_at_reference() {
        assert_eq!(analytic_epsilon(3.0, 3.0, 0.2, 1.0, 0.05), 0.2);
        // θ0 = π/2: ε ∝ 1/cosh²
        let e = analytic_epsilon(10.0, 0.0, 0.1, PI / 2.0, 0.1);
        assert!((e - 0.1 / 1.0f64.cosh().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn breakdown_is_reported() {
        // l = 1/2 near the south pole: dr/dt ≈ -1 drives r through zero
        let s0 = state(1, 0.5, 0.01, PI - 0.01);
        let err = integrate(s0, 5, true).unwrap_err();
        assert!(matches!(err, Error::ModelBreakdown { step: 1, .. }));
    }

    #[test]
    fn no_regimes_at_fixed_point() {
        let sys = SpinSystem::from_twice_ell(20).unwrap();
        let p = probe_state(0.5).unwrap();
        let r = vec![1.0; 50];
        let th = vec![0.0; 50];
        let reg = regime_detect(&r, &th, sys, p, RegimeThresholds::default()).unwrap();
        assert!(!reg.found());
        assert_eq!(reg, Regimes::default());
    }
}
