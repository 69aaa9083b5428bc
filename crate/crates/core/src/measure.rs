//! Empirical-measure arithmetic.
//!
//! An [`EmpiricalMeasure`] is a uniformly weighted sample `(1/N) sum delta_{x_i}`.
//! For two equal-size samples in one dimension the Wasserstein-2 distance is
//! attained by the sorted coupling, which [`w2_sorted`] computes exactly;
//! [`w2_bruteforce`] is the permutation oracle used to validate it.
//!
//! Measure functionals that enter the transformed dynamics carry their Lions
//! derivatives as explicit callbacks ([`AlphaFunctional`]); on an empirical
//! measure those derivatives reduce to coordinate derivatives of the finite
//! dimensional projection, scaled by `1/N`, which is exactly how the particle
//! schemes consume them.
//!
//! All statistics reduce in the fixed pairwise order of the crate, so they are
//! bit-identical across runs and thread counts.

use crate::error::{Error, Result};
use crate::sums::{pairwise_map_sum, pairwise_sum};

/// Uniformly weighted sample measure. Samples are finite and `N >= 1`; the
/// mean is cached at construction so per-particle drift callbacks stay O(1).
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    samples: Vec<f64>,
    mean: f64,
}

impl EmpiricalMeasure {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empirical measure needs at least one sample".into()));
        }
        if let Some(bad) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample {bad} is not finite: {}",
                samples[bad]
            )));
        }
        let mean = pairwise_sum(&samples) / samples.len() as f64;
        Ok(Self { samples, mean })
    }

    /// Dirac measure at a point.
    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `(1/N) sum f(x_i)` in the fixed pairwise order.
    pub fn functional_mean<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        pairwise_map_sum(&self.samples, &f) / self.samples.len() as f64
    }
}

/// Arithmetic mean of the sample.
pub fn empirical_mean(mu: &EmpiricalMeasure) -> f64 {
    mu.mean()
}

/// `p`-th absolute moment `(1/N) sum |x_i|^p`, `p >= 1`.
pub fn empirical_moment(mu: &EmpiricalMeasure, p: u32) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidArgument("moment order must be >= 1".into()));
    }
    Ok(mu.functional_mean(|x| x.abs().powi(p as i32)))
}

/// Exact Wasserstein-2 distance between equal-size empirical measures via the
/// sorted coupling.
pub fn w2_sorted(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::UnsupportedInput(format!(
            "W2 requires equal sample counts, got {} vs {}",
            mu.len(),
            nu.len()
        )));
    }
    let mut xs = mu.samples.clone();
    let mut ys = nu.samples.clone();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let sq: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| (x - y) * (x - y)).collect();
    Ok((pairwise_sum(&sq) / xs.len() as f64).sqrt())
}

/// Largest sample count accepted by the brute-force oracle.
pub const W2_BRUTEFORCE_MAX: usize = 8;

/// Wasserstein-2 by exhaustive search over all `N!` permutation couplings.
/// Test oracle for [`w2_sorted`]; refuses `N > 8`.
///
/// The cost of each coupling is evaluated over the ascending order of `mu`'s
/// samples with the same reduction as `w2_sorted`, so on continuous data the
/// minimiser (the sorted coupling) reproduces `w2_sorted` bit-exactly.
pub fn w2_bruteforce(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::UnsupportedInput(format!(
            "W2 requires equal sample counts, got {} vs {}",
            mu.len(),
            nu.len()
        )));
    }
    let n = mu.len();
    if n > W2_BRUTEFORCE_MAX {
        return Err(Error::UnsupportedInput(format!(
            "brute-force W2 refused for N = {n} > {W2_BRUTEFORCE_MAX}"
        )));
    }
    let mut xs = mu.samples.clone();
    xs.sort_unstable_by(f64::total_cmp);
    let ys = &nu.samples;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut sq = vec![0.0; n];
    permute(&mut perm, n, &mut |p| {
        for (i, &j) in p.iter().enumerate() {
            let d = xs[i] - ys[j];
            sq[i] = d * d;
        }
        let cost = pairwise_sum(&sq);
        if cost < best {
            best = cost;
        }
    });
    Ok((best / n as f64).sqrt())
}

/// Heap's algorithm over the first `k` entries.
fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(perm);
        return;
    }
    for i in 0..k {
        permute(perm, k - 1, visit);
        if k.is_multiple_of(2) {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}

/// A scalar functional of probability measures together with its Lions
/// derivatives and uniform bounds.
///
/// On an empirical measure the derivative callbacks are exactly the coordinate
/// derivatives of the finite dimensional projection scaled by `1/N`, which is
/// how the particle transform consumes them. Implementations must satisfy
/// `d_mu(mu, 0) = 0` and respect the declared `sup` bounds.
pub trait AlphaFunctional: Send + Sync {
    /// Evaluate all measure-level state once; the returned evaluator answers
    /// pointwise derivative queries in O(1).
    fn at<'a>(&'a self, mu: &EmpiricalMeasure) -> Box<dyn AlphaAt + 'a>;

    /// Uniform bound on `|alpha(mu)|`.
    fn alpha_sup(&self) -> f64;

    /// Uniform bound on `|d_mu alpha(mu)(y)|`.
    fn dalpha_sup(&self) -> f64;

    fn eval(&self, mu: &EmpiricalMeasure) -> f64 {
        self.at(mu).value()
    }

    fn d_mu(&self, mu: &EmpiricalMeasure, y: f64) -> f64 {
        self.at(mu).d_mu(y)
    }

    fn dy_d_mu(&self, mu: &EmpiricalMeasure, y: f64) -> f64 {
        self.at(mu).dy_d_mu(y)
    }

    fn d2_mu(&self, mu: &EmpiricalMeasure, y: f64, yp: f64) -> f64 {
        self.at(mu).d2_mu(y, yp)
    }
}

/// Pointwise view of an [`AlphaFunctional`] at a fixed measure.
pub trait AlphaAt {
    fn value(&self) -> f64;
    fn d_mu(&self, y: f64) -> f64;
    fn dy_d_mu(&self, y: f64) -> f64;
    fn d2_mu(&self, y: f64, yp: f64) -> f64;
}

/// Measure-independent jump coefficient; all derivatives vanish.
#[derive(Debug, Clone, Copy)]
pub struct ConstantAlpha(pub f64);

struct ConstantAt(f64);

impl AlphaAt for ConstantAt {
    fn value(&self) -> f64 {
        self.0
    }
    fn d_mu(&self, _y: f64) -> f64 {
        0.0
    }
    fn dy_d_mu(&self, _y: f64) -> f64 {
        0.0
    }
    fn d2_mu(&self, _y: f64, _yp: f64) -> f64 {
        0.0
    }
}

impl AlphaFunctional for ConstantAlpha {
    fn at<'a>(&'a self, _mu: &EmpiricalMeasure) -> Box<dyn AlphaAt + 'a> {
        Box::new(ConstantAt(self.0))
    }
    fn alpha_sup(&self) -> f64 {
        self.0.abs()
    }
    fn dalpha_sup(&self) -> f64 {
        0.0
    }
}

/// `max |psi'| = 3 sqrt(3) / 8`, attained at `y = 1/sqrt(3)`.
pub const PSI_DERIV_SUP: f64 = 0.649519052838329;

#[inline]
fn psi(y: f64) -> f64 {
    y * y / (1.0 + y * y)
}

#[inline]
fn psi_deriv(y: f64) -> f64 {
    let d = 1.0 + y * y;
    2.0 * y / (d * d)
}

#[inline]
fn psi_second(y: f64) -> f64 {
    let d = 1.0 + y * y;
    (2.0 - 6.0 * y * y) / (d * d * d)
}

/// Built-in smooth jump functional `alpha(mu) = a0 + a1 sin(m)` with
/// `m = integral of psi d mu` and `psi(y) = y^2 / (1 + y^2)`.
///
/// `psi'(0) = 0` makes the Lions derivative vanish at zero as the transformed
/// dynamics require, and all bounds are explicit:
/// `alpha_sup = |a0| + |a1|`, `dalpha_sup = |a1| * max|psi'|`.
#[derive(Debug, Clone, Copy)]
pub struct SineAlpha {
    pub a0: f64,
    pub a1: f64,
}

struct SineAt {
    a1: f64,
    value: f64,
    cos_m: f64,
    sin_m: f64,
}

impl AlphaAt for SineAt {
    fn value(&self) -> f64 {
        self.value
    }
    fn d_mu(&self, y: f64) -> f64 {
        self.a1 * self.cos_m * psi_deriv(y)
    }
    fn dy_d_mu(&self, y: f64) -> f64 {
        self.a1 * self.cos_m * psi_second(y)
    }
    fn d2_mu(&self, y: f64, yp: f64) -> f64 {
        -self.a1 * self.sin_m * psi_deriv(y) * psi_deriv(yp)
    }
}

impl AlphaFunctional for SineAlpha {
    fn at<'a>(&'a self, mu: &EmpiricalMeasure) -> Box<dyn AlphaAt + 'a> {
        let m = mu.functional_mean(psi);
        Box::new(SineAt {
            a1: self.a1,
            value: self.a0 + self.a1 * m.sin(),
            cos_m: m.cos(),
            sin_m: m.sin(),
        })
    }
    fn alpha_sup(&self) -> f64 {
        self.a0.abs() + self.a1.abs()
    }
    fn dalpha_sup(&self) -> f64 {
        self.a1.abs() * PSI_DERIV_SUP
    }
}
