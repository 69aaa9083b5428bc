//! The three Euler–Maruyama particle schemes.

use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::model::{
    interaction_kernel, DecomposableModel, GeneralModel, Model, NeuronalModel,
};
use crate::transform::{g_forward, g_inverse_scalar, phi_bar_derivs_unchecked, TransformSpec};

use super::coeffs::{
    invert_vector_transform, transformed_coeffs, transformed_diffusion_value,
    transformed_drift_value,
};
use super::{check_finite, fill_per_particle, BrownianLattice, ParticlePaths, Scheme, SchemeConfig};

/// Diagnostics of the hybrid scheme's implicit steps.
#[derive(Debug, Clone, Copy, Default)]
pub struct HybridStats {
    /// Largest contraction ratio observed across all implicit solves.
    pub max_contraction: f64,
    /// Largest sweep count needed by an implicit solve.
    pub max_iterations: usize,
}

/// Dispatches to the runner selected by `cfg.scheme`, deriving the transform
/// parameters from the model where needed.
pub fn run_scheme(model: &Model, lattice: &BrownianLattice, cfg: &SchemeConfig) -> Result<ParticlePaths> {
    match cfg.scheme {
        Scheme::Scheme2Direct => scheme2_run(model, lattice, cfg),
        Scheme::Scheme1Decomposable => match model {
            Model::Decomposable(m) => {
                let spec = m.transform_spec(cfg.safety)?;
                scheme1_decomposable_run(m, &spec, lattice, cfg)
            }
            _ => Err(Error::UnsupportedInput(format!(
                "scheme1_decomposable requires a decomposable model, got {}",
                model.label()
            ))),
        },
        Scheme::Scheme1GeneralHybrid => match model {
            Model::General(m) => {
                let gspec = m.transform_spec(cfg.safety)?;
                scheme1_general_run(m, &gspec, lattice, cfg)
            }
            _ => Err(Error::UnsupportedInput(format!(
                "scheme1_general_hybrid requires a general model, got {}",
                model.label()
            ))),
        },
    }
}

/// Explicit Euler–Maruyama directly on the particle system:
/// `X_{n+1}^i = X_n^i + b(X_n^i, mu_n) h + sigma(X_n^i) dW_n^i` with `mu_n`
/// the empirical measure of all particles at step `n`.
pub fn scheme2_run(model: &Model, lattice: &BrownianLattice, cfg: &SchemeConfig) -> Result<ParticlePaths> {
    cfg.validate(lattice)?;
    match model {
        Model::Decomposable(m) => {
            let initial = model.sample_initial(lattice.n_particles(), lattice.seed())?;
            euler_loop(lattice, cfg, initial, |states, mu, drift, diff| {
                fill_per_particle(drift, |i| m.drift(states[i], mu));
                fill_per_particle(diff, |i| (m.sigma)(states[i]));
            })
        }
        Model::Neuronal(m) => {
            if m.locations.len() < lattice.n_particles() {
                return Err(Error::InvalidArgument(format!(
                    "neuronal model holds {} locations but the lattice drives {} particles",
                    m.locations.len(),
                    lattice.n_particles()
                )));
            }
            let initial = model.sample_initial(lattice.n_particles(), lattice.seed())?;
            euler_loop(lattice, cfg, initial, |states, _mu, drift, diff| {
                neuronal_drift_into(m, states, drift);
                fill_per_particle(diff, |i| crate::model::neuronal_diffusion(states[i], m));
            })
        }
        Model::General(_) => Err(Error::UnsupportedInput(
            "the direct scheme consumes decomposable or particle-native models; \
             use the hybrid scheme for general models"
                .into(),
        )),
    }
}

/// Direct Euler loop shared by the decomposable and particle-native paths.
/// The coefficient filler sees the step's state snapshot and its empirical
/// measure.
fn euler_loop<F>(
    lattice: &BrownianLattice,
    cfg: &SchemeConfig,
    mut states: Vec<f64>,
    fill_coeffs: F,
) -> Result<ParticlePaths>
where
    F: Fn(&[f64], &EmpiricalMeasure, &mut [f64], &mut [f64]),
{
    let n = lattice.n_particles();
    let m_steps = lattice.steps_at(cfg.level)?;
    let h = cfg.t_final / m_steps as f64;
    let dw_all = lattice.coarsened(cfg.level)?;

    let mut paths = ParticlePaths::with_capacity(n, m_steps + 1, h);
    check_finite(&states, 0)?;
    paths.push_row(&states);

    let mut drift = vec![0.0; n];
    let mut diff = vec![0.0; n];
    for step in 0..m_steps {
        let mu = EmpiricalMeasure::new(states.clone())?;
        fill_coeffs(&states, &mu, &mut drift, &mut diff);
        let dw = &dw_all[step * n..(step + 1) * n];
        for i in 0..n {
            states[i] = states[i] + drift[i] * h + diff[i] * dw[i];
        }
        check_finite(&states, step + 1)?;
        paths.push_row(&states);
    }
    Ok(paths)
}

/// Firing-set factoring of the neuronal interaction: the indicator on the
/// sending neuron empties the sum for all but the few particles inside the
/// firing window, so each drift is a short kernel sum over that set. Matches
/// [`crate::model::neuronal_drift`] term for term (both fold the firing
/// neighbours in ascending index order).
fn neuronal_drift_into(model: &NeuronalModel, states: &[f64], out: &mut [f64]) {
    let n = states.len();
    let firing: Vec<usize> = (0..n)
        .filter(|&j| {
            let v = states[j].rem_euclid(2.0);
            (1.0..=1.0 + model.kappa).contains(&v)
        })
        .collect();
    let inv_n = 1.0 / n as f64;
    fill_per_particle(out, |i| {
        let vi = states[i].rem_euclid(2.0);
        let mut drift = model.rate(vi);
        if vi <= 1.0 {
            let mut acc = 0.0;
            for &j in &firing {
                acc += interaction_kernel(&model.locations[i], &model.locations[j]);
            }
            drift += acc * inv_n;
        }
        drift
    });
}

/// Euler–Maruyama on the transformed states `Z = G(X)`:
/// `Z_{n+1}^i = Z_n^i + bt(X_n^i, mu_n) h + st(X_n^i) dW_n^i` with
/// `bt = (1 + a phibar') b + (1/2) a phibar'' sigma^2`,
/// `st = (1 + a phibar') sigma`, `X_n = G^{-1}(Z_n)` and `mu_n` the empirical
/// measure of the back-mapped states. Returns the `X` paths.
pub fn scheme1_decomposable_run(
    model: &DecomposableModel,
    spec: &TransformSpec,
    lattice: &BrownianLattice,
    cfg: &SchemeConfig,
) -> Result<ParticlePaths> {
    cfg.validate(lattice)?;
    let n = lattice.n_particles();
    let m_steps = lattice.steps_at(cfg.level)?;
    let h = cfg.t_final / m_steps as f64;
    let dw_all = lattice.coarsened(cfg.level)?;
    let newton_tol = cfg.newton_tol();
    let alpha = spec.alpha;

    let mut x = model.initial.sample(n, lattice.seed());
    check_finite(&x, 0)?;
    let mut z: Vec<f64> = x.iter().map(|&xi| g_forward(xi, spec)).collect();

    let mut paths = ParticlePaths::with_capacity(n, m_steps + 1, h);
    paths.push_row(&x);

    let mut drift = vec![0.0; n];
    let mut diff = vec![0.0; n];
    for step in 0..m_steps {
        let mu = EmpiricalMeasure::new(x.clone())?;
        fill_per_particle(&mut drift, |i| {
            let (_, d1, d2) = phi_bar_derivs_unchecked(x[i], spec.c);
            let sigma = (model.sigma)(x[i]);
            transformed_drift_value(alpha, d1, d2, model.drift(x[i], &mu), sigma * sigma)
        });
        fill_per_particle(&mut diff, |i| {
            let (_, d1, _) = phi_bar_derivs_unchecked(x[i], spec.c);
            transformed_diffusion_value(alpha, d1, (model.sigma)(x[i]))
        });
        let dw = &dw_all[step * n..(step + 1) * n];
        for i in 0..n {
            z[i] = z[i] + drift[i] * h + diff[i] * dw[i];
        }
        check_finite(&z, step + 1)?;
        fill_per_particle(&mut x, |i| {
            g_inverse_scalar(z[i], spec, newton_tol).unwrap_or(f64::NAN)
        });
        if let Some(particle) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(format!(
                "transform inversion failed at step {} for particle {particle}",
                step + 1
            )));
        }
        paths.push_row(&x);
    }
    Ok(paths)
}

/// Hybrid explicit-implicit scheme for general models; see
/// [`scheme1_general_run_with_stats`].
pub fn scheme1_general_run(
    model: &GeneralModel,
    gspec: &crate::transform::GeneralTransformSpec,
    lattice: &BrownianLattice,
    cfg: &SchemeConfig,
) -> Result<ParticlePaths> {
    scheme1_general_run_with_stats(model, gspec, lattice, cfg).map(|(paths, _)| paths)
}

/// Hybrid explicit-implicit scheme: an explicit Euler step on the transformed
/// states with coefficients evaluated at the untransformed previous states,
/// followed by the implicit fixed point
/// `X_n^i = G^{-1}(Xt_n^i, mu^{X_n})` initialised at `X_{n-1}`.
///
/// Also returns the worst-case implicit iteration count and contraction ratio
/// observed over the run.
pub fn scheme1_general_run_with_stats(
    model: &GeneralModel,
    gspec: &crate::transform::GeneralTransformSpec,
    lattice: &BrownianLattice,
    cfg: &SchemeConfig,
) -> Result<(ParticlePaths, HybridStats)> {
    cfg.validate(lattice)?;
    let n = lattice.n_particles();
    let m_steps = lattice.steps_at(cfg.level)?;
    let h = cfg.t_final / m_steps as f64;
    let dw_all = lattice.coarsened(cfg.level)?;

    let mut x = model.initial.sample(n, lattice.seed());
    check_finite(&x, 0)?;
    let mu0 = EmpiricalMeasure::new(x.clone())?;
    let spec0 = gspec.fix_alpha(model.alpha.eval(&mu0))?;
    let mut xt: Vec<f64> = x.iter().map(|&xi| g_forward(xi, &spec0)).collect();

    let mut paths = ParticlePaths::with_capacity(n, m_steps + 1, h);
    paths.push_row(&x);
    let mut stats = HybridStats::default();

    let mut noise = vec![0.0; n];
    for step in 0..m_steps {
        let coeffs = transformed_coeffs(&x, model, gspec)?;
        let dw = &dw_all[step * n..(step + 1) * n];
        coeffs.apply_noise(dw, &mut noise);
        for i in 0..n {
            xt[i] = xt[i] + coeffs.drift[i] * h + noise[i];
        }
        check_finite(&xt, step + 1)?;
        let inversion = invert_vector_transform(
            &xt,
            &x,
            model,
            gspec,
            cfg.inversion_tol,
            cfg.implicit_max_iters,
        )?;
        x = inversion.states;
        stats.max_contraction = stats.max_contraction.max(inversion.max_contraction);
        stats.max_iterations = stats.max_iterations.max(inversion.iterations);
        check_finite(&x, step + 1)?;
        paths.push_row(&x);
    }
    Ok((paths, stats))
}

/// One-sided limits at zero of the transformed drift `bt` for a decomposable
/// model. The jump coefficient is chosen exactly so that these agree; the
/// common value is `(b1(0-) + b1(0+))/2 + b2(0, mu)`.
pub fn transformed_drift_limits(
    model: &DecomposableModel,
    spec: &TransformSpec,
    mu: &EmpiricalMeasure,
) -> (f64, f64) {
    let sigma0 = (model.sigma)(0.0);
    let sigma_sq = sigma0 * sigma0;
    let b2_at_zero = (model.b2)(0.0, mu);
    // phibar'(0) = 0 and phibar''(0 -/+) = -/+ 2
    let left = transformed_drift_value(spec.alpha, 0.0, -2.0, model.b1_left0 + b2_at_zero, sigma_sq);
    let right = transformed_drift_value(spec.alpha, 0.0, 2.0, model.b1_right0 + b2_at_zero, sigma_sq);
    (left, right)
}
