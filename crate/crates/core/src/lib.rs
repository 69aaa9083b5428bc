//! Simulation library for one-dimensional McKean–Vlasov SDEs whose drift has a
//! single spatial discontinuity at zero, and for their interacting particle
//! systems.
//!
//! The library is organised around five building blocks:
//!
//! * [`transform`] — the discontinuity-removing map `G(x) = x + α x|x| φ(x/c)`
//!   together with its derivatives and inverse, in both the constant-`α` and
//!   the measure-dependent form.
//! * [`measure`] — empirical-measure arithmetic: exact 1-D Wasserstein-2
//!   distance, moments, and measure functionals with derivative callbacks.
//! * [`model`] — drift/diffusion definitions for the supported model families
//!   (decomposable, general measure-modulated, and the neuronal network model).
//! * [`simulate`] — seed-deterministic Brownian lattices, coarsening, and the
//!   three Euler–Maruyama particle schemes.
//! * [`analysis`] — coupled-level RMSE convergence studies, occupation-time and
//!   moment diagnostics.
//!
//! All simulation output is a pure function of `(seed, configuration)`:
//! Brownian increments come from counter-based per-particle streams and every
//! reduction uses a fixed deterministic order, so results are bit-identical
//! across runs and thread counts.

// Validation guards use `!(x > 0.0)` so NaNs are rejected along with
// out-of-domain values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod measure;
pub mod model;
pub mod simulate;
pub mod transform;

mod sums;

pub use error::{Error, Result};
