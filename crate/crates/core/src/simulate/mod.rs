//! Brownian lattices and the particle time-stepping schemes.
//!
//! The Brownian driver is generated once at the finest level and coarsened by
//! block sums, so every level of a convergence study runs on the *same*
//! underlying Brownian paths — the coupling the level-to-level RMSE protocol
//! requires. Increments derive from counter-based per-particle streams and all
//! shared statistics reduce in a fixed order, making every run a pure function
//! of `(seed, configuration)` regardless of thread count.
//!
//! Three schemes are provided:
//!
//! * [`scheme2_run`] — explicit Euler–Maruyama directly on the particle
//!   system (decomposable and particle-native models).
//! * [`scheme1_decomposable_run`] — Euler–Maruyama on the transformed states
//!   `Z = G(X)` with the jump removed, mapped back through `G^{-1}`.
//! * [`scheme1_general_run`] — the hybrid explicit-implicit scheme for
//!   measure-dependent transforms: an explicit Euler step on the transformed
//!   states followed by a fixed-point inversion through `G(., mu)`.
//!
//! Within one Euler step, particle updates are independent given the measure
//! snapshot; the empirical measure and the shared interaction sums form a
//! per-step synchronization barrier.

mod coeffs;
mod lattice;
mod runners;

pub use coeffs::{invert_vector_transform, transformed_coeffs, Inversion, TransformedCoeffs};
pub use lattice::BrownianLattice;
pub use runners::{
    run_scheme, scheme1_decomposable_run, scheme1_general_run, scheme1_general_run_with_stats,
    scheme2_run, transformed_drift_limits, HybridStats,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Particle counts at or above this threshold run the per-particle maps on
/// the rayon pool. Values are identical either way; only scheduling changes.
pub(crate) const PAR_THRESHOLD: usize = 1024;

/// Time-stepping scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Euler–Maruyama on the transformed states (decomposable drift).
    Scheme1Decomposable,
    /// Euler–Maruyama directly on the particle system.
    Scheme2Direct,
    /// Hybrid explicit-implicit scheme with measure-dependent transform.
    Scheme1GeneralHybrid,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scheme::Scheme1Decomposable => "scheme1_decomposable",
            Scheme::Scheme2Direct => "scheme2_direct",
            Scheme::Scheme1GeneralHybrid => "scheme1_general_hybrid",
        };
        f.write_str(name)
    }
}

/// Per-run configuration consumed by the scheme runners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Time discretisation level: `2^level * T` uniform steps.
    pub level: u32,
    pub t_final: f64,
    /// Tolerance for transform inversions (scalar Newton and the implicit
    /// fixed point).
    pub inversion_tol: f64,
    /// Iteration budget for the implicit fixed point of the hybrid scheme.
    pub implicit_max_iters: usize,
    /// Safety factor applied to the theoretical bump-radius bound.
    pub safety: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, level: u32) -> Self {
        Self {
            scheme,
            level,
            t_final: 1.0,
            inversion_tol: 1e-12,
            implicit_max_iters: 50,
            safety: 0.9,
        }
    }

    pub fn validate(&self, lattice: &BrownianLattice) -> Result<()> {
        if self.level > lattice.level_max() {
            return Err(Error::InvalidArgument(format!(
                "level {} exceeds lattice level_max {}",
                self.level,
                lattice.level_max()
            )));
        }
        if self.t_final != lattice.t_final() {
            return Err(Error::InvalidArgument(format!(
                "config t_final {} disagrees with lattice t_final {}",
                self.t_final,
                lattice.t_final()
            )));
        }
        if !(self.inversion_tol > 0.0) {
            return Err(Error::InvalidArgument("inversion tolerance must be positive".into()));
        }
        if self.implicit_max_iters == 0 {
            return Err(Error::InvalidArgument("implicit iteration budget must be >= 1".into()));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::InvalidArgument("safety factor must lie in (0,1)".into()));
        }
        Ok(())
    }

    /// Newton tolerance used for the scalar inversions inside the runners:
    /// tighter than the outer tolerance so fixed-point deltas are measured
    /// against converged scalar solves.
    pub(crate) fn newton_tol(&self) -> f64 {
        (self.inversion_tol * 1e-3).max(1e-15)
    }
}

/// Dense particle trajectories: a `(steps + 1) x n_particles` array of states
/// including the initial row.
#[derive(Debug, Clone)]
pub struct ParticlePaths {
    n_particles: usize,
    h: f64,
    states: Vec<f64>,
}

impl ParticlePaths {
    pub(crate) fn with_capacity(n_particles: usize, rows: usize, h: f64) -> Self {
        Self { n_particles, h, states: Vec::with_capacity(rows * n_particles) }
    }

    pub(crate) fn push_row(&mut self, states: &[f64]) {
        debug_assert_eq!(states.len(), self.n_particles);
        self.states.extend_from_slice(states);
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    /// Number of stored rows, i.e. step count `M + 1`.
    pub fn n_rows(&self) -> usize {
        self.states.len() / self.n_particles
    }

    /// Number of time steps `M`.
    pub fn n_steps(&self) -> usize {
        self.n_rows() - 1
    }

    /// Uniform step size `h = T / M`.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.states[step * self.n_particles..(step + 1) * self.n_particles]
    }

    /// Terminal states.
    pub fn terminal(&self) -> &[f64] {
        self.row(self.n_rows() - 1)
    }
}

/// Returns `Err(Diverged)` naming the first non-finite particle, if any.
pub(crate) fn check_finite(states: &[f64], step: usize) -> Result<()> {
    match states.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(particle) => Err(Error::Diverged { step, particle }),
    }
}

/// Fills `out[i] = f(i)`, in parallel for large particle counts. `f` must be
/// a pure function of `i` and read-only snapshots, so the result does not
/// depend on the thread count.
pub(crate) fn fill_per_particle<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    use rayon::prelude::*;
    if out.len() >= PAR_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(|(i, slot)| *slot = f(i));
    } else {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
    }
}
