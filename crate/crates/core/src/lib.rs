//! Solvers for classical and quantum dynamics written with position as the
//! independent variable.
//!
//! * [`classical`]: Momentumian, time velocity and time-of-flight t(q).
//! * [`specfun`]: Γ, Mittag-Leffler, complex erfc, Caputo half-derivative.
//! * [`pide`]: closed-form half-order Dirac pair ψ±(t).
//! * [`tide`]: coupled first-order Dirac equations χ±(q).
//! * [`scenarios`]: figure-level pipelines writing CSV and manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod classical;
pub mod error;
pub mod model;
pub mod ode;
pub mod output;
pub mod pide;
pub mod quadrature;
pub mod scenarios;
pub mod selftest;
pub mod specfun;
pub mod tide;

pub use error::{Error, Result};
pub use model::{Branch, PhysicalScales, Potential};
pub use num_complex::Complex64;
