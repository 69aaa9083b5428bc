//! Seed-deterministic Brownian increment lattice.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sums::tree_sum_pow2;

/// Hard cap on the finest level; beyond this the lattice would not fit in
/// memory for any useful particle count.
const LEVEL_MAX_GUARD: u32 = 26;
/// Total allocation guard for the increment array.
const BYTES_GUARD: u64 = 8 << 30;

/// Finest-level Brownian increments for `N` particles, coarsenable to any
/// level `l <= level_max` by block sums.
///
/// Increments are a deterministic function of `(seed, particle, step)`:
/// particle `i` draws from ChaCha stream `i` seeded by `seed`, in step order.
/// Generation may run per-particle in parallel without affecting the values.
///
/// Block sums use a strict binary tree, so
/// `coarse_l[n] == coarse_{l+1}[2n] + coarse_{l+1}[2n+1]` holds bit-exactly
/// and all levels share the same Brownian paths.
#[derive(Debug, Clone)]
pub struct BrownianLattice {
    seed: u64,
    n_particles: usize,
    level_max: u32,
    t_final: f64,
    /// Fine steps per particle: `T * 2^level_max`.
    m_max: usize,
    /// Particle-major: `increments[i * m_max + n]`.
    increments: Vec<f64>,
}

impl BrownianLattice {
    /// Generates the lattice at the finest level. Increments are i.i.d.
    /// `Normal(0, h_max)` with `h_max = T / (T * 2^level_max) = 2^-level_max`.
    pub fn generate(seed: u64, n_particles: usize, level_max: u32, t_final: f64) -> Result<Self> {
        let m_max = Self::validate(n_particles, level_max, t_final)?;
        let mut increments = vec![0.0; n_particles * m_max];
        let sqrt_h = (t_final / m_max as f64).sqrt();
        increments
            .par_chunks_mut(m_max)
            .enumerate()
            .for_each(|(particle, row)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(particle as u64);
                for slot in row.iter_mut() {
                    *slot = sqrt_h * rng.sample::<f64, _>(StandardNormal);
                }
            });
        Ok(Self { seed, n_particles, level_max, t_final, m_max, increments })
    }

    /// Builds a lattice from explicit fine-level increments (deterministic
    /// fixtures and oracles). `increments` is particle-major with
    /// `T * 2^level_max` entries per particle.
    pub fn from_increments(
        seed: u64,
        n_particles: usize,
        level_max: u32,
        t_final: f64,
        increments: Vec<f64>,
    ) -> Result<Self> {
        let m_max = Self::validate(n_particles, level_max, t_final)?;
        if increments.len() != n_particles * m_max {
            return Err(Error::LengthMismatch {
                left: increments.len(),
                right: n_particles * m_max,
            });
        }
        Ok(Self { seed, n_particles, level_max, t_final, m_max, increments })
    }

    fn validate(n_particles: usize, level_max: u32, t_final: f64) -> Result<usize> {
        if n_particles == 0 {
            return Err(Error::InvalidArgument("need at least one particle".into()));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "terminal time must be positive and finite, got {t_final}"
            )));
        }
        let steps = t_final * (2f64).powi(level_max as i32);
        let required = n_particles as f64 * steps * std::mem::size_of::<f64>() as f64;
        let required_bytes = if required >= u64::MAX as f64 { u64::MAX } else { required as u64 };
        if level_max > LEVEL_MAX_GUARD {
            return Err(Error::MemoryGuard {
                required_bytes,
                detail: format!("level_max {level_max} exceeds guard {LEVEL_MAX_GUARD}"),
            });
        }
        let m_max = steps.round();
        if (steps - m_max).abs() > 1e-6 || m_max < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "T * 2^level_max must be a positive integer, got {steps}"
            )));
        }
        if required_bytes > BYTES_GUARD {
            return Err(Error::MemoryGuard {
                required_bytes,
                detail: format!("guard is {BYTES_GUARD} bytes"),
            });
        }
        Ok(m_max as usize)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn level_max(&self) -> u32 {
        self.level_max
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of steps at `level`: `T * 2^level`.
    pub fn steps_at(&self, level: u32) -> Result<usize> {
        if level > self.level_max {
            return Err(Error::InvalidArgument(format!(
                "level {level} exceeds level_max {}",
                self.level_max
            )));
        }
        let block = 1usize << (self.level_max - level);
        if !self.m_max.is_multiple_of(block) {
            return Err(Error::InvalidArgument(format!(
                "T * 2^{level} is not an integer step count"
            )));
        }
        Ok(self.m_max / block)
    }

    /// Increment `n` of `particle` at `level`: the binary-tree block sum of
    /// `2^(level_max - level)` fine increments.
    pub fn increment(&self, particle: usize, level: u32, n: usize) -> Result<f64> {
        let m = self.steps_at(level)?;
        if particle >= self.n_particles || n >= m {
            return Err(Error::InvalidArgument(format!(
                "increment index out of range: particle {particle}, step {n}"
            )));
        }
        let block = self.m_max / m;
        let row = &self.increments[particle * self.m_max..(particle + 1) * self.m_max];
        Ok(tree_sum_pow2(&row[n * block..(n + 1) * block]))
    }

    /// All increments at `level`, step-major: entry `n * N + i` is the `n`-th
    /// increment of particle `i`.
    pub fn coarsened(&self, level: u32) -> Result<Vec<f64>> {
        let m = self.steps_at(level)?;
        let block = self.m_max / m;
        let n = self.n_particles;
        let mut out = vec![0.0; m * n];
        for i in 0..n {
            let row = &self.increments[i * self.m_max..(i + 1) * self.m_max];
            for (s, out_chunk) in row.chunks_exact(block).enumerate() {
                out[s * n + i] = tree_sum_pow2(out_chunk);
            }
        }
        Ok(out)
    }

    /// Terminal Brownian value `W_T` of a particle summed at the given level
    /// (binary tree over the level's increments when their count is a power
    /// of two, pairwise otherwise). For power-of-two step counts the result
    /// is bit-identical across levels.
    pub fn total_increment(&self, particle: usize, level: u32) -> Result<f64> {
        let m = self.steps_at(level)?;
        let levels: Vec<f64> =
            (0..m).map(|n| self.increment(particle, level, n)).collect::<Result<_>>()?;
        if m.is_power_of_two() {
            Ok(tree_sum_pow2(&levels))
        } else {
            Ok(crate::sums::pairwise_sum(&levels))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seed_deterministic() {
        let a = BrownianLattice::generate(42, 8, 6, 1.0).unwrap();
        let b = BrownianLattice::generate(42, 8, 6, 1.0).unwrap();
        assert_eq!(a.increments, b.increments);
        let c = BrownianLattice::generate(43, 8, 6, 1.0).unwrap();
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn particle_streams_are_stable_under_particle_count() {
        // Adding particles must not disturb existing streams.
        let small = BrownianLattice::generate(7, 4, 5, 1.0).unwrap();
        let large = BrownianLattice::generate(7, 9, 5, 1.0).unwrap();
        for i in 0..4 {
            for n in 0..small.steps_at(5).unwrap() {
                assert_eq!(
                    small.increment(i, 5, n).unwrap(),
                    large.increment(i, 5, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn increment_variance_matches_step_size() {
        let level = 10;
        let lattice = BrownianLattice::generate(1, 1024, level, 1.0).unwrap();
        let n_samples = lattice.increments.len() as f64; // ~1e6
        let h = 1.0 / (1u64 << level) as f64;
        let mean: f64 = lattice.increments.iter().sum::<f64>() / n_samples;
        let var: f64 =
            lattice.increments.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n_samples;
        // three standard errors of the sample variance of a normal
        let se = h * (2.0 / n_samples).sqrt();
        assert!((var - h).abs() <= 3.0 * se, "var {var} vs h {h} (se {se})");
    }

    #[test]
    fn coarsen_at_level_max_is_identity() {
        let lattice = BrownianLattice::generate(3, 5, 4, 1.0).unwrap();
        let coarse = lattice.coarsened(4).unwrap();
        for i in 0..5 {
            for n in 0..16 {
                assert_eq!(coarse[n * 5 + i], lattice.increments[i * 16 + n]);
            }
        }
    }

    #[test]
    fn block_sum_pair_identity_is_bit_exact() {
        let lattice = BrownianLattice::generate(11, 3, 8, 1.0).unwrap();
        for level in 0..8 {
            for i in 0..3 {
                for n in 0..lattice.steps_at(level).unwrap() {
                    let coarse = lattice.increment(i, level, n).unwrap();
                    let fine = lattice.increment(i, level + 1, 2 * n).unwrap()
                        + lattice.increment(i, level + 1, 2 * n + 1).unwrap();
                    assert_eq!(coarse, fine);
                }
            }
        }
    }

    #[test]
    fn terminal_brownian_value_is_level_invariant() {
        let lattice = BrownianLattice::generate(19, 4, 9, 1.0).unwrap();
        for i in 0..4 {
            let w_t = lattice.total_increment(i, 9).unwrap();
            for level in 0..9 {
                assert_eq!(lattice.total_increment(i, level).unwrap(), w_t);
            }
        }
    }

    #[test]
    fn coarse_variance_doubles_per_level_drop() {
        let lattice = BrownianLattice::generate(5, 512, 9, 1.0).unwrap();
        let var_at = |level: u32| {
            let coarse = lattice.coarsened(level).unwrap();
            coarse.iter().map(|x| x * x).sum::<f64>() / coarse.len() as f64
        };
        for level in [5, 6, 7, 8] {
            let ratio = var_at(level - 1) / var_at(level);
            assert!((ratio - 2.0).abs() < 0.25, "variance ratio {ratio} at level {level}");
        }
    }

    #[test]
    fn memory_guard_refuses_oversized_lattices() {
        match BrownianLattice::generate(1, 2, 27, 1.0) {
            Err(Error::MemoryGuard { required_bytes, .. }) => {
                assert!(required_bytes > 0);
            }
            other => panic!("expected memory guard, got {other:?}"),
        }
        // ~16 GiB request at a legal level
        match BrownianLattice::generate(1, 1 << 16, 25, 1.0) {
            Err(Error::MemoryGuard { .. }) => {}
            other => panic!("expected memory guard, got {other:?}"),
        }
    }

    #[test]
    fn fractional_terminal_times_are_rejected() {
        assert!(BrownianLattice::generate(1, 2, 3, 0.7).is_err());
        assert!(BrownianLattice::generate(1, 2, 3, 2.0).is_ok());
    }
}
