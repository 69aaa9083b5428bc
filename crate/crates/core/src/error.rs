//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The diffusion coefficient vanishes at the discontinuity. The jump
    /// coefficient `alpha` is undefined in that case.
    #[error("degenerate diffusion: sigma(0) = 0")]
    DegenerateDiffusion,

    /// A declared bound (e.g. `|alpha| <= alpha_sup`) was violated at runtime,
    /// invalidating the transform's invertibility guarantee.
    #[error("declared bound violated: {0}")]
    BoundViolation(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("memory guard: refusing to allocate lattice of {required_bytes} bytes ({detail})")]
    MemoryGuard { required_bytes: u64, detail: String },

    #[error("simulation diverged at step {step}: non-finite state for particle {particle}")]
    Diverged { step: usize, particle: usize },

    #[error(
        "implicit inversion failed after {iterations} iterations \
         (measured contraction ratio {contraction}); the bump radius c is too large"
    )]
    ImplicitFailure { iterations: usize, contraction: f64 },

    /// Scalar inversion did not converge. Unreachable while `dG/dx > 1/2`
    /// holds, so this signals a bug or corrupted inputs.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
