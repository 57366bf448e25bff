//! Simulation of a spin-`l` quantum gyroscope repeatedly colliding with
//! spin-1/2 probes.
//!
//! * [`spin_algebra`]: spin operators, coherent states, probe and density
//!   matrices.
//! * [`channel`]: the single-collision channel in three equivalent forms,
//!   Choi matrix, iteration.
//! * [`estimators`]: Bloch vector, moments, coherences, residual `χ`, purity.
//! * [`semiclassical`]: mean-field equations for `(r, θ)`, analytic laws,
//!   regime detection.
//! * [`povm`]: the measurement induced on the gyroscope by measuring a probe.
//! * [`experiment`]: configured runs writing CSV and JSON artifacts.

pub mod channel;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod linalg;
pub mod povm;
pub mod semiclassical;
pub mod spin_algebra;

pub use error::{Error, Result};
