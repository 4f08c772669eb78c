//! Numerical laboratory for inviscid vortex stretching in axisymmetric, swirl-free flow.
//!
//! The model retains only the stretching part of the vorticity dynamics: the azimuthal
//! vorticity `ω_θ` is transported in amplitude by its own induced radial velocity,
//! `∂_t ω_θ = (u_r / r) ω_θ`, with `u_r` recovered from `ω_θ` by the axisymmetric
//! Biot–Savart law. For vorticity that is odd in `z` and non-positive on the upper
//! half-plane this closes a positive feedback loop whose weighted enstrophy obeys a
//! Riccati inequality and blows up in finite time; the crate exists to compute that
//! quantitatively and to contrast it with the full (transport included) axisymmetric
//! Euler dynamics, where the same mechanism self-depletes.
//!
//! Module map:
//!
//! * [`quadrature`] — azimuthal Gauss–Legendre rule and the reduced meridian kernels.
//! * [`field`] — grids, scalar fields, the vortex-ring-pair datum, diagnostics, snapshots.
//! * [`biot_savart`] — velocity assembly from vorticity (tables, probes, stretching rate).
//! * [`kappa`] — lower bound for the interaction kernel over a support region.
//! * [`dynamics`] — the stretching-only evolution, blowup detection and reporting.
//! * [`euler`] — axisymmetric Euler (transport + stretching) on the same datum.
//! * [`spectral`] — 3D periodic spectral reference implementations for cross-checks.
//! * [`config`] / [`output`] — run configuration and artifact writers shared with the CLI.

pub mod biot_savart;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod euler;
pub mod field;
pub mod kappa;
pub mod oracle;
pub mod output;
pub mod quadrature;
pub mod runner;
pub mod spectral;

pub use error::{Error, Result};
