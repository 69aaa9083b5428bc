//! Drift/diffusion definitions for the model families the schemes consume.
//!
//! Three families are supported:
//!
//! * [`DecomposableModel`] — `b(x, mu) = b1(x) + b2(x, mu)` with the jump
//!   confined to `b1`, so the jump coefficient `alpha` is measure-independent.
//!   [`systemic_risk_model`] builds the mean-reverting bang-bang example.
//! * [`GeneralModel`] — drift with a measure-dependent jump, carrying an
//!   [`AlphaFunctional`] consistent with the jump of `b`.
//!   [`modulated_jump_model`] builds the built-in exerciser whose jump size is
//!   modulated through the measure.
//! * [`NeuronalModel`] — particle-native action-potential dynamics with a
//!   firing interaction kernel; consumed by the direct scheme only.
//!
//! Models are immutable after construction and safe to share across threads.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::measure::{AlphaFunctional, ConstantAlpha, EmpiricalMeasure, SineAlpha};
use crate::transform::{alpha_from_jump, choose_c, GeneralTransformSpec, TransformSpec};

/// ChaCha stream reserved for initial-state draws.
const STREAM_INITIAL: u64 = u64::MAX;
/// ChaCha stream reserved for neuron location draws.
const STREAM_LOCATIONS: u64 = u64::MAX - 1;

/// Initial law of the particle states, sampled seed-deterministically and
/// independent of the Brownian increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLaw {
    /// All particles start at the same point.
    Dirac(f64),
    Normal { mean: f64, sd: f64 },
    /// Normal draw reduced modulo 2 once at initialisation (neuronal states).
    NormalMod2 { mean: f64, sd: f64 },
}

impl InitialLaw {
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        match *self {
            InitialLaw::Dirac(x0) => vec![x0; n],
            InitialLaw::Normal { mean, sd } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(STREAM_INITIAL);
                (0..n).map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal)).collect()
            }
            InitialLaw::NormalMod2 { mean, sd } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(STREAM_INITIAL);
                (0..n)
                    .map(|_| (mean + sd * rng.sample::<f64, _>(StandardNormal)).rem_euclid(2.0))
                    .collect()
            }
        }
    }
}

pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MeasureFn = Arc<dyn Fn(f64, &EmpiricalMeasure) -> f64 + Send + Sync>;

/// Drift `b(x, mu) = b1(x) + b2(x, mu)` with the discontinuity confined to
/// `b1`, plus a state-only Lipschitz diffusion with `sigma(0) != 0`.
#[derive(Clone)]
pub struct DecomposableModel {
    pub label: String,
    pub b1: StateFn,
    /// One-sided limits of `b1` at zero.
    pub b1_left0: f64,
    pub b1_right0: f64,
    pub b2: MeasureFn,
    pub sigma: StateFn,
    pub initial: InitialLaw,
}

impl DecomposableModel {
    /// Validates `sigma(0) != 0` and that the supplied one-sided limits match
    /// `b1` just off the discontinuity.
    pub fn new(
        label: impl Into<String>,
        b1: StateFn,
        b1_left0: f64,
        b1_right0: f64,
        b2: MeasureFn,
        sigma: StateFn,
        initial: InitialLaw,
    ) -> Result<Self> {
        if sigma(0.0) == 0.0 {
            return Err(Error::DegenerateDiffusion);
        }
        let probe = 1e-8;
        let tol = 1e-6;
        if (b1(-probe) - b1_left0).abs() > tol || (b1(probe) - b1_right0).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "declared one-sided limits ({b1_left0}, {b1_right0}) disagree with b1 near zero \
                 ({}, {})",
                b1(-probe),
                b1(probe)
            )));
        }
        Ok(Self { label: label.into(), b1, b1_left0, b1_right0, b2, sigma, initial })
    }

    /// Full drift `b1(x) + b2(x, mu)`.
    #[inline]
    pub fn drift(&self, x: f64, mu: &EmpiricalMeasure) -> f64 {
        (self.b1)(x) + (self.b2)(x, mu)
    }

    /// Measure-independent jump coefficient
    /// `alpha = (b1(0-) - b1(0+)) / (2 sigma^2(0))`.
    pub fn alpha(&self) -> Result<f64> {
        alpha_from_jump(self.b1_left0, self.b1_right0, (self.sigma)(0.0))
    }

    /// Transform parameters with bump radius `safety * min(1, 1/|alpha|)`.
    pub fn transform_spec(&self, safety: f64) -> Result<TransformSpec> {
        let alpha = self.alpha()?;
        let c = choose_c(alpha.abs(), 0.0, safety)?;
        TransformSpec::new(alpha, c)
    }
}

/// Per-measure prepared drift evaluation for non-decomposable models.
///
/// `prepare` digests the measure once per step; the returned closure is O(1)
/// per state, which keeps the particle loops at O(N) per step.
pub trait MeasureDrift: Send + Sync {
    fn prepare<'a>(&'a self, mu: &EmpiricalMeasure) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>;
    /// One-sided drift limits at zero for the given measure.
    fn left_limit(&self, mu: &EmpiricalMeasure) -> f64;
    fn right_limit(&self, mu: &EmpiricalMeasure) -> f64;
}

/// Drift with a measure-dependent jump at zero, its diffusion, and the jump
/// functional `alpha` consistent with the jump of `b`.
#[derive(Clone)]
pub struct GeneralModel {
    pub label: String,
    pub b: Arc<dyn MeasureDrift>,
    pub sigma: StateFn,
    /// Uniform bound on `|sigma|`.
    pub sigma_bound: f64,
    pub alpha: Arc<dyn AlphaFunctional>,
    pub initial: InitialLaw,
}

impl GeneralModel {
    /// Discrepancy between the declared jump functional and the jump of `b`
    /// at the given measure. The model contract keeps this at rounding level.
    pub fn alpha_consistency(&self, mu: &EmpiricalMeasure) -> Result<f64> {
        let from_jump =
            alpha_from_jump(self.b.left_limit(mu), self.b.right_limit(mu), (self.sigma)(0.0))?;
        Ok((self.alpha.eval(mu) - from_jump).abs())
    }

    /// Transform parameters with bump radius
    /// `safety * min(1, 1/(alpha_sup + dalpha_sup))`.
    pub fn transform_spec(&self, safety: f64) -> Result<GeneralTransformSpec> {
        let c = choose_c(self.alpha.alpha_sup(), self.alpha.dalpha_sup(), safety)?;
        GeneralTransformSpec::new(self.alpha.alpha_sup(), self.alpha.dalpha_sup(), c)
    }
}

/// Mean-reverting model with a bang-bang drift jump at zero:
/// `b(x, mu) = a (mean(mu) - x) + k1 1{x<=0} + k2 1{x>0}`,
/// `sigma(x) = sigma0 + x`. Particles start at zero.
pub fn systemic_risk_model(a: f64, kappa1: f64, kappa2: f64, sigma0: f64) -> Result<DecomposableModel> {
    if sigma0 == 0.0 {
        return Err(Error::DegenerateDiffusion);
    }
    if !(kappa1 < 0.0 && kappa2 > 0.0 && sigma0 > 0.0 && a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "systemic risk requires kappa1 < 0 < kappa2, sigma0 > 0, a >= 0; \
             got a={a}, kappa1={kappa1}, kappa2={kappa2}, sigma0={sigma0}"
        )));
    }
    DecomposableModel::new(
        "systemic_risk",
        Arc::new(move |x| if x <= 0.0 { kappa1 } else { kappa2 }),
        kappa1,
        kappa2,
        Arc::new(move |x, mu: &EmpiricalMeasure| a * (mu.mean() - x)),
        Arc::new(move |x| sigma0 + x),
        InitialLaw::Dirac(0.0),
    )
}

struct ModulatedDrift {
    a: f64,
    k1: f64,
    k2: f64,
}

impl ModulatedDrift {
    fn kappa(&self, mu: &EmpiricalMeasure) -> f64 {
        self.k1 + self.k2 * mu.functional_mean(|y| y * y / (1.0 + y * y)).sin()
    }
}

impl MeasureDrift for ModulatedDrift {
    fn prepare<'a>(&'a self, mu: &EmpiricalMeasure) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
        let mean = mu.mean();
        let kappa = self.kappa(mu);
        let a = self.a;
        Box::new(move |x| {
            let jump = if x <= 0.0 { kappa } else { -kappa };
            a * (mean - x) + jump
        })
    }

    fn left_limit(&self, mu: &EmpiricalMeasure) -> f64 {
        self.a * mu.mean() + self.kappa(mu)
    }

    fn right_limit(&self, mu: &EmpiricalMeasure) -> f64 {
        self.a * mu.mean() - self.kappa(mu)
    }
}

/// Built-in non-decomposable exerciser: the jump size is modulated through
/// the measure,
/// `b(x, mu) = a (mean(mu) - x) + kappa(mu) (1{x<=0} - 1{x>0})` with
/// `kappa(mu) = k1 + k2 sin(m)`, `m = integral of y^2/(1+y^2) d mu`, and a
/// constant bounded diffusion `sigma(x) = sigma0`.
///
/// The jump of `b` at zero is `2 kappa(mu)`, so
/// `alpha(mu) = kappa(mu) / sigma0^2`; the attached [`SineAlpha`] realises
/// exactly that functional (`a0 = k1/sigma0^2`, `a1 = k2/sigma0^2`), making
/// the alpha-consistency invariant hold by construction.
pub fn modulated_jump_model(a: f64, k1: f64, k2: f64, sigma0: f64) -> Result<GeneralModel> {
    if sigma0 == 0.0 {
        return Err(Error::DegenerateDiffusion);
    }
    if !(sigma0 > 0.0 && a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "modulated jump model requires sigma0 > 0 and a >= 0, got a={a}, sigma0={sigma0}"
        )));
    }
    let s2 = sigma0 * sigma0;
    let alpha = SineAlpha { a0: k1 / s2, a1: k2 / s2 };
    if alpha.alpha_sup() + alpha.dalpha_sup() >= 100.0 {
        return Err(Error::InvalidArgument(
            "jump magnitudes leave no usable bump radius".into(),
        ));
    }
    Ok(GeneralModel {
        label: "modulated_jump".into(),
        b: Arc::new(ModulatedDrift { a, k1, k2 }),
        sigma: Arc::new(move |_| sigma0),
        sigma_bound: sigma0,
        alpha: Arc::new(alpha),
        initial: InitialLaw::Normal { mean: 0.0, sd: 1.0 },
    })
}

/// Wraps a decomposable model into the general interface with a constant
/// jump functional. Used to cross-check the hybrid scheme against the
/// decomposable one.
pub fn general_from_decomposable(model: &DecomposableModel, sigma_bound: f64) -> Result<GeneralModel> {
    let alpha = ConstantAlpha(model.alpha()?);
    struct Wrap(DecomposableModel);
    impl MeasureDrift for Wrap {
        fn prepare<'a>(
            &'a self,
            mu: &EmpiricalMeasure,
        ) -> Box<dyn Fn(f64) -> f64 + Send + Sync + 'a> {
            let mu = mu.clone();
            Box::new(move |x| self.0.drift(x, &mu))
        }
        fn left_limit(&self, mu: &EmpiricalMeasure) -> f64 {
            self.0.b1_left0 + (self.0.b2)(0.0, mu)
        }
        fn right_limit(&self, mu: &EmpiricalMeasure) -> f64 {
            self.0.b1_right0 + (self.0.b2)(0.0, mu)
        }
    }
    Ok(GeneralModel {
        label: format!("{}_as_general", model.label),
        b: Arc::new(Wrap(model.clone())),
        sigma: model.sigma.clone(),
        sigma_bound,
        alpha: Arc::new(alpha),
        initial: model.initial,
    })
}

/// Diffusion variant for the neuronal model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaVariant {
    /// `sigma(v) = sqrt(2 eps)` everywhere.
    Constant,
    /// `sigma(v) = sqrt(2 eps) + (v mod 2)`.
    Affine,
}

/// Action-potential dynamics of `N` interacting neurons. States live on the
/// real line and are reduced modulo 2 only inside coefficient evaluation;
/// wrapping the state itself would corrupt the Brownian increments.
#[derive(Clone)]
pub struct NeuronalModel {
    pub lambda_hat: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub sigma_variant: SigmaVariant,
    /// Fixed neuron locations in 3-space.
    pub locations: Vec<[f64; 3]>,
    pub eta_mean: f64,
    pub eta_sd: f64,
}

impl NeuronalModel {
    /// Builds the model with locations drawn i.i.d. from an isotropic normal
    /// centred at `xi_mean` with component standard deviation `xi_sd`.
    #[allow(clippy::too_many_arguments)]
    pub fn sample(
        lambda_hat: f64,
        kappa: f64,
        epsilon: f64,
        sigma_variant: SigmaVariant,
        n: usize,
        seed: u64,
        xi_mean: [f64; 3],
        xi_sd: f64,
        eta_mean: f64,
        eta_sd: f64,
    ) -> Result<Self> {
        if !(lambda_hat >= 0.0 && kappa > 0.0 && kappa < 1.0 && epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "neuronal model requires lambda_hat >= 0, kappa in (0,1), epsilon > 0; \
                 got lambda_hat={lambda_hat}, kappa={kappa}, epsilon={epsilon}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_LOCATIONS);
        let locations = (0..n)
            .map(|_| {
                [
                    xi_mean[0] + xi_sd * rng.sample::<f64, _>(StandardNormal),
                    xi_mean[1] + xi_sd * rng.sample::<f64, _>(StandardNormal),
                    xi_mean[2] + xi_sd * rng.sample::<f64, _>(StandardNormal),
                ]
            })
            .collect();
        Ok(Self { lambda_hat, kappa, epsilon, sigma_variant, locations, eta_mean, eta_sd })
    }

    pub fn initial(&self) -> InitialLaw {
        InitialLaw::NormalMod2 { mean: self.eta_mean, sd: self.eta_sd }
    }

    /// `lambda(v) = -lambda_hat * v` on `[0, 1]`, `1` on `(1, 2)`.
    #[inline]
    pub fn rate(&self, v: f64) -> f64 {
        if v <= 1.0 {
            -self.lambda_hat * v
        } else {
            1.0
        }
    }
}

/// Interaction kernel `Theta(x, y) = sin(|x - y|)`.
#[inline]
pub fn interaction_kernel(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt().sin()
}

/// Drift of neuron `i` given the full unwrapped state vector:
/// `lambda(v_i) + 1{v_i in [0,1]} (1/N) sum_j Theta(xi_i, xi_j) 1{v_j in [1, 1+kappa]}`
/// with `v = V mod 2`.
///
/// Reference evaluation in O(N); the scheme runner uses the firing-set
/// factoring, validated against this function.
pub fn neuronal_drift(i: usize, states: &[f64], model: &NeuronalModel) -> f64 {
    let n = states.len();
    let vi = states[i].rem_euclid(2.0);
    let mut drift = model.rate(vi);
    if vi <= 1.0 {
        let mut acc = 0.0;
        for (j, &vj_raw) in states.iter().enumerate() {
            let vj = vj_raw.rem_euclid(2.0);
            if (1.0..=1.0 + model.kappa).contains(&vj) {
                acc += interaction_kernel(&model.locations[i], &model.locations[j]);
            }
        }
        drift += acc / n as f64;
    }
    drift
}

/// Diffusion of a neuron at unwrapped state `v`.
#[inline]
pub fn neuronal_diffusion(v: f64, model: &NeuronalModel) -> f64 {
    let base = (2.0 * model.epsilon).sqrt();
    match model.sigma_variant {
        SigmaVariant::Constant => base,
        SigmaVariant::Affine => base + v.rem_euclid(2.0),
    }
}

/// A model bundled for the scheme runners.
#[derive(Clone)]
pub enum Model {
    Decomposable(DecomposableModel),
    Neuronal(NeuronalModel),
    General(GeneralModel),
}

impl Model {
    pub fn label(&self) -> &str {
        match self {
            Model::Decomposable(m) => &m.label,
            Model::Neuronal(_) => "neuronal",
            Model::General(m) => &m.label,
        }
    }

    /// Initial particle states; a pure function of `(n, seed)`, independent
    /// of the Brownian increments.
    pub fn sample_initial(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            Model::Decomposable(m) => Ok(m.initial.sample(n, seed)),
            Model::General(m) => Ok(m.initial.sample(n, seed)),
            Model::Neuronal(m) => {
                if n > m.locations.len() {
                    return Err(Error::InvalidArgument(format!(
                        "neuronal model holds {} locations but {n} particles were requested",
                        m.locations.len()
                    )));
                }
                Ok(m.initial().sample(n, seed))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::w2_sorted;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;

    fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> EmpiricalMeasure {
        EmpiricalMeasure::new((0..n).map(|_| (rng.random::<f64>() - 0.5) * 6.0).collect()).unwrap()
    }

    #[test]
    fn systemic_risk_parameters() {
        let m = systemic_risk_model(1.0, -0.5, 0.5, 0.7).unwrap();
        assert_relative_eq!(m.alpha().unwrap(), -1.0 / 0.98, max_relative = 1e-15);
        assert_eq!((m.b1)(-1e-9), -0.5);
        assert_eq!((m.b1)(1e-9), 0.5);
        assert_eq!((m.b1)(0.0), -0.5); // indicator closed on the left
        // b2(x, dirac_x) = 0
        for x in [-2.0, 0.0, 3.5] {
            assert_eq!((m.b2)(x, &EmpiricalMeasure::dirac(x).unwrap()), 0.0);
        }
        assert!(matches!(systemic_risk_model(1.0, -0.5, 0.5, 0.0), Err(Error::DegenerateDiffusion)));
        assert!(systemic_risk_model(1.0, 0.5, 0.5, 0.7).is_err());
    }

    #[test]
    fn systemic_risk_is_lipschitz_in_the_measure() {
        let a = 2.5;
        let m = systemic_risk_model(a, -0.5, 0.5, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.random_range(2..=32);
            let mu = random_measure(&mut rng, n);
            let nu = random_measure(&mut rng, n);
            let x = (rng.random::<f64>() - 0.5) * 4.0;
            let lhs = (m.drift(x, &mu) - m.drift(x, &nu)).abs();
            let w2 = w2_sorted(&mu, &nu).unwrap();
            assert!(lhs <= a * w2 + 1e-12, "not Lipschitz: {lhs} > {a} * {w2}");
        }
    }

    #[test]
    fn modulated_jump_consistency() {
        let m = modulated_jump_model(0.5, 0.3, 0.2, 1.0).unwrap();
        // kappa(dirac_0) = k1: psi(0) = 0, sin(0) = 0.
        let d0 = EmpiricalMeasure::dirac(0.0).unwrap();
        assert_eq!(m.b.left_limit(&d0) - m.b.right_limit(&d0), 2.0 * 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mu = random_measure(&mut rng, 17);
            assert!(m.alpha_consistency(&mu).unwrap() <= 1e-12);
            // jump of b equals 2 kappa(mu)
            let jump = m.b.left_limit(&mu) - m.b.right_limit(&mu);
            let prepared = m.b.prepare(&mu);
            let probe = 1e-12;
            assert_relative_eq!(prepared(-probe) - prepared(probe), jump, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_alpha_wrapper_is_consistent() {
        let dec = systemic_risk_model(1.0, -0.5, 0.5, 0.7).unwrap();
        let gen = general_from_decomposable(&dec, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mu = random_measure(&mut rng, 9);
            assert!(gen.alpha_consistency(&mu).unwrap() <= 1e-12);
        }
    }

    fn test_neuronal(n: usize) -> NeuronalModel {
        NeuronalModel::sample(
            0.02,
            0.01,
            0.1,
            SigmaVariant::Constant,
            n,
            77,
            [0.0; 3],
            1.0,
            1.0,
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn neuronal_rate_and_drift_examples() {
        let m = test_neuronal(8);
        // No firing neighbours: states all in the recovery window.
        let states = vec![1.5; 8];
        assert_eq!(neuronal_drift(0, &states, &m), 1.0);
        let states = vec![0.5; 8];
        assert_relative_eq!(neuronal_drift(0, &states, &m), -0.01, max_relative = 1e-15);
        // Neighbours outside [1, 1+kappa] contribute nothing.
        let mut states = vec![0.5; 8];
        states[3] = 1.2;
        states[5] = 0.9;
        assert_relative_eq!(neuronal_drift(0, &states, &m), -0.01, max_relative = 1e-15);
    }

    #[test]
    fn neuronal_drift_is_bounded() {
        let m = test_neuronal(16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bound = m.lambda_hat + 1.0 + 1.0;
        for _ in 0..200 {
            let states: Vec<f64> = (0..16).map(|_| (rng.random::<f64>() - 0.5) * 10.0).collect();
            for i in 0..16 {
                assert!(neuronal_drift(i, &states, &m).abs() <= bound);
            }
        }
    }

    #[test]
    fn neuronal_diffusion_variants() {
        let mut m = test_neuronal(4);
        assert_relative_eq!(neuronal_diffusion(0.3, &m), 0.2f64.sqrt(), max_relative = 1e-15);
        m.sigma_variant = SigmaVariant::Affine;
        assert_eq!(neuronal_diffusion(0.0, &m), 0.2f64.sqrt());
        assert_eq!(neuronal_diffusion(1.5, &m), 0.2f64.sqrt() + 1.5);
        assert_eq!(neuronal_diffusion(3.5, &m), 0.2f64.sqrt() + 1.5); // mod 2
    }

    #[test]
    fn initial_laws_are_seed_deterministic() {
        let law = InitialLaw::Normal { mean: 1.0, sd: 2.0 };
        assert_eq!(law.sample(64, 5), law.sample(64, 5));
        assert_ne!(law.sample(64, 5), law.sample(64, 6));
        let wrapped = InitialLaw::NormalMod2 { mean: 1.0, sd: 2.0 };
        assert!(wrapped.sample(256, 5).iter().all(|v| (0.0..2.0).contains(v)));
        // Prefix stability: a smaller ensemble is a prefix of a larger one.
        let big = law.sample(64, 5);
        let small = law.sample(16, 5);
        assert_eq!(&big[..16], &small[..]);
    }

    #[test]
    fn decomposable_rejects_wrong_limits() {
        let r = DecomposableModel::new(
            "bad",
            Arc::new(|x| if x <= 0.0 { -1.0 } else { 1.0 }),
            -1.0,
            0.5, // wrong right limit
            Arc::new(|_, _: &EmpiricalMeasure| 0.0),
            Arc::new(|_| 1.0),
            InitialLaw::Dirac(0.0),
        );
        assert!(r.is_err());
    }
}
