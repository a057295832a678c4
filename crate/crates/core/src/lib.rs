//! Free energy of the spherical 2-spin Sherrington–Kirkpatrick model.
//!
//! The crate follows the route from a GOE spectrum to `lim F_n(β)/n`:
//! semicircle analytics and equal-mass binning ([`semicircle`]), GOE
//! sampling and spectra ([`goe`]), Dirichlet machinery ([`dirichlet`]), the
//! discretized Lagrange-multiplier problem and the closed-form limits
//! ([`variational`]), and finite-`n` Monte Carlo estimators ([`free_energy`]).
//! [`verify`] bundles the acceptance checks used by `ssk verify`.

pub mod dirichlet;
pub mod eigen;
pub mod error;
pub mod free_energy;
pub mod goe;
pub mod quadrature;
pub mod rng;
pub mod semicircle;
pub mod sweep;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
