//! Convergence-rate estimation and diagnostics.
//!
//! The level protocol runs a scheme at time levels `l = level_min ..
//! level_max` on one Brownian lattice generated at the finest level, so
//! consecutive levels are driven by the same Brownian paths, and measures the
//! level-to-level RMSE of the terminal states
//! `sqrt((1/N) sum_i (X_T^{i,l} - X_T^{i,l-1})^2)`. The strong order in the
//! step size is the least-squares slope of `log2(rmse)` against `-level`.
//!
//! Occupation-time and moment diagnostics quantify how long the discretised
//! particles spend near the drift discontinuity and that their moments stay
//! level-stable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{w2_sorted, EmpiricalMeasure};
use crate::model::Model;
use crate::simulate::{run_scheme, BrownianLattice, ParticlePaths, Scheme, SchemeConfig};
use crate::sums::pairwise_sum;
use crate::transform::{g_deriv, g_forward, g_inverse_scalar, g_second, TransformSpec};

/// Level-to-level RMSE of two terminal-state vectors computed from the same
/// lattice: `sqrt((1/N) sum (fine_i - coarse_i)^2)`.
pub fn rmse_levels(fine: &[f64], coarse: &[f64]) -> Result<f64> {
    if fine.len() != coarse.len() {
        return Err(Error::LengthMismatch { left: fine.len(), right: coarse.len() });
    }
    let sq: Vec<f64> = fine.iter().zip(coarse).map(|(f, c)| (f - c) * (f - c)).collect();
    Ok((pairwise_sum(&sq) / fine.len() as f64).sqrt())
}

/// Result of the log-log order fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderFit {
    /// Least-squares slope of `log2(rmse)` against `-level`.
    pub slope: f64,
    /// Maximum absolute deviation of the fit.
    pub residual: f64,
    /// Whether the coarsest level was excluded as pre-asymptotic.
    pub trimmed_coarsest: bool,
}

/// Fits the strong order from per-level RMSE values.
///
/// The coarsest level is excluded when its deviation under the fit of the
/// remaining points exceeds three times their own fit residual (standard
/// pre-asymptotic trimming, reported in the output and never silent).
pub fn estimate_order(levels: &[u32], rmse: &[f64]) -> Result<OrderFit> {
    if levels.len() != rmse.len() {
        return Err(Error::LengthMismatch { left: levels.len(), right: rmse.len() });
    }
    if levels.len() < 3 {
        return Err(Error::InvalidArgument("order fit needs at least 3 levels".into()));
    }
    if let Some(idx) = rmse.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::DegenerateData(format!(
            "rmse at level {} is not positive ({}); aliased levels?",
            levels[idx], rmse[idx]
        )));
    }
    let ts: Vec<f64> = levels.iter().map(|&l| -(l as f64)).collect();
    let ys: Vec<f64> = rmse.iter().map(|&r| r.log2()).collect();

    let full = least_squares(&ts, &ys);
    if levels.len() >= 4 {
        let trimmed = least_squares(&ts[1..], &ys[1..]);
        let coarse_dev = (ys[0] - (trimmed.intercept + trimmed.slope * ts[0])).abs();
        if coarse_dev > 3.0 * trimmed.residual {
            return Ok(OrderFit {
                slope: trimmed.slope,
                residual: trimmed.residual,
                trimmed_coarsest: true,
            });
        }
    }
    Ok(OrderFit { slope: full.slope, residual: full.residual, trimmed_coarsest: false })
}

struct LineFit {
    slope: f64,
    intercept: f64,
    residual: f64,
}

fn least_squares(ts: &[f64], ys: &[f64]) -> LineFit {
    let n = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&t, &y) in ts.iter().zip(ys) {
        cov += (t - t_mean) * (y - y_mean);
        var += (t - t_mean) * (t - t_mean);
    }
    let slope = cov / var;
    let intercept = y_mean - slope * t_mean;
    let residual = ts
        .iter()
        .zip(ys)
        .map(|(&t, &y)| (y - (intercept + slope * t)).abs())
        .fold(0.0f64, f64::max);
    LineFit { slope, intercept, residual }
}

/// Per-level RMSE values and the fitted strong order of one convergence
/// study. `levels[j]` is the finer level of the pair that produced
/// `rmse[j]`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub model: String,
    pub seeds: Vec<u64>,
    pub n_particles: usize,
    pub t_final: f64,
    pub levels: Vec<u32>,
    pub rmse: Vec<f64>,
    pub fitted_order: f64,
    pub fit_residual: f64,
    pub trimmed_coarsest: bool,
}

impl ConvergenceReport {
    /// `level,rmse` CSV with the full study configuration echoed in header
    /// comments; identical bytes for identical studies.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# scheme: {}\n", self.scheme));
        out.push_str(&format!("# model: {}\n", self.model));
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("# seeds: {}\n", seeds.join(",")));
        out.push_str(&format!("# n_particles: {}\n", self.n_particles));
        out.push_str(&format!("# t_final: {}\n", self.t_final));
        out.push_str(&format!("# fitted_order: {}\n", self.fitted_order));
        out.push_str(&format!("# fit_residual: {}\n", self.fit_residual));
        out.push_str(&format!("# trimmed_coarsest: {}\n", self.trimmed_coarsest));
        out.push_str("level,rmse\n");
        for (level, rmse) in self.levels.iter().zip(&self.rmse) {
            out.push_str(&format!("{level},{rmse}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Study parameters for [`convergence_study`].
#[derive(Debug, Clone, Copy)]
pub struct StudyConfig {
    pub scheme: Scheme,
    pub n_particles: usize,
    pub level_min: u32,
    pub level_max: u32,
    pub t_final: f64,
    pub inversion_tol: f64,
    pub implicit_max_iters: usize,
    pub safety: f64,
}

impl StudyConfig {
    pub fn new(scheme: Scheme, n_particles: usize, level_min: u32, level_max: u32) -> Self {
        Self {
            scheme,
            n_particles,
            level_min,
            level_max,
            t_final: 1.0,
            inversion_tol: 1e-12,
            implicit_max_iters: 50,
            safety: 0.9,
        }
    }

    fn scheme_config(&self, level: u32) -> SchemeConfig {
        SchemeConfig {
            scheme: self.scheme,
            level,
            t_final: self.t_final,
            inversion_tol: self.inversion_tol,
            implicit_max_iters: self.implicit_max_iters,
            safety: self.safety,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.level_min < 2 {
            return Err(Error::InvalidArgument("level_min must be at least 2".into()));
        }
        if self.level_max < self.level_min + 3 {
            return Err(Error::InvalidArgument(
                "need at least three level pairs: level_max >= level_min + 3".into(),
            ));
        }
        Ok(())
    }
}

/// Single-seed convergence study; see [`convergence_study_multi`].
pub fn convergence_study(model: &Model, study: &StudyConfig, seed: u64) -> Result<ConvergenceReport> {
    convergence_study_multi(model, study, &[seed])
}

/// Runs the scheme at every level of the study on one lattice per seed,
/// forms level-to-level RMSEs, pools them across seeds (root mean square,
/// i.e. the RMSE of the pooled ensemble), and fits the strong order.
///
/// A pure function of `(model parameters, study, seeds)`.
pub fn convergence_study_multi(
    model: &Model,
    study: &StudyConfig,
    seeds: &[u64],
) -> Result<ConvergenceReport> {
    study.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let n_pairs = (study.level_max - study.level_min) as usize;
    let mut rmse_sq_sums = vec![0.0; n_pairs];

    for &seed in seeds {
        let lattice =
            BrownianLattice::generate(seed, study.n_particles, study.level_max, study.t_final)?;
        let mut previous: Option<Vec<f64>> = None;
        for level in study.level_min..=study.level_max {
            let cfg = study.scheme_config(level);
            let paths = run_scheme(model, &lattice, &cfg)
                .map_err(|e| annotate_level(e, level))?;
            let terminal = paths.terminal().to_vec();
            if let Some(coarse) = &previous {
                let r = rmse_levels(&terminal, coarse)?;
                rmse_sq_sums[(level - study.level_min - 1) as usize] += r * r;
            }
            previous = Some(terminal);
        }
    }

    let rmse: Vec<f64> =
        rmse_sq_sums.iter().map(|&s| (s / seeds.len() as f64).sqrt()).collect();
    let levels: Vec<u32> = (study.level_min + 1..=study.level_max).collect();
    let fit = estimate_order(&levels, &rmse)?;
    Ok(ConvergenceReport {
        scheme: study.scheme.to_string(),
        model: model.label().to_string(),
        seeds: seeds.to_vec(),
        n_particles: study.n_particles,
        t_final: study.t_final,
        levels,
        rmse,
        fitted_order: fit.slope,
        fit_residual: fit.residual,
        trimmed_coarsest: fit.trimmed_coarsest,
    })
}

fn annotate_level(e: Error, level: u32) -> Error {
    match e {
        Error::Diverged { step, particle } => Error::NumericFailure(format!(
            "level {level}: simulation diverged at step {step}, particle {particle}"
        )),
        other => other,
    }
}

/// Monte Carlo estimate of the expected occupation time of the
/// `eps`-neighbourhood of the discontinuity:
/// `(1/N) sum_i sum_{n < M} h 1{|X^i_{t_n}| < eps}`.
pub fn occupation_estimate(paths: &ParticlePaths, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let h = paths.step_size();
    let n = paths.n_particles() as f64;
    let mut count = 0u64;
    for step in 0..paths.n_steps() {
        count += paths.row(step).iter().filter(|x| x.abs() < eps).count() as u64;
    }
    Ok(h * count as f64 / n)
}

/// Occupation estimates for an `eps` sweep, averaged across seeds.
pub fn occupation_study(
    model: &Model,
    cfg: &SchemeConfig,
    n_particles: usize,
    seeds: &[u64],
    eps_values: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("need at least one seed".into()));
    }
    let mut sums = vec![0.0; eps_values.len()];
    for &seed in seeds {
        let lattice = BrownianLattice::generate(seed, n_particles, cfg.level, cfg.t_final)?;
        let paths = run_scheme(model, &lattice, cfg)?;
        for (slot, &eps) in sums.iter_mut().zip(eps_values) {
            *slot += occupation_estimate(&paths, eps)?;
        }
    }
    Ok(eps_values
        .iter()
        .zip(&sums)
        .map(|(&eps, &s)| (eps, s / seeds.len() as f64))
        .collect())
}

/// Per-step moment diagnostics of a path bundle.
#[derive(Debug, Clone)]
pub struct MomentStability {
    /// Empirical `p`-th moment at each stored step.
    pub per_step: Vec<f64>,
    /// Maximum of `per_step`.
    pub max_moment: f64,
    /// Per-step one-step increment `p`-th moments divided by `h^{p/2}`;
    /// level-stable for a moment-stable scheme.
    pub increment_ratios: Vec<f64>,
    pub max_increment_ratio: f64,
}

/// Empirical `p`-th moments over time plus normalised one-step increment
/// moments, `p` in `{2, 4, 8}`.
pub fn moment_stability(paths: &ParticlePaths, p: u32) -> Result<MomentStability> {
    if !matches!(p, 2 | 4 | 8) {
        return Err(Error::InvalidArgument(format!("p must be one of 2, 4, 8; got {p}")));
    }
    let n = paths.n_particles() as f64;
    let power = p as i32;
    let mut per_step = Vec::with_capacity(paths.n_rows());
    for step in 0..paths.n_rows() {
        let terms: Vec<f64> = paths.row(step).iter().map(|x| x.abs().powi(power)).collect();
        per_step.push(pairwise_sum(&terms) / n);
    }
    let h_scale = paths.step_size().powf(p as f64 / 2.0);
    let mut increment_ratios = Vec::with_capacity(paths.n_steps());
    for step in 0..paths.n_steps() {
        let terms: Vec<f64> = paths
            .row(step)
            .iter()
            .zip(paths.row(step + 1))
            .map(|(a, b)| (b - a).abs().powi(power))
            .collect();
        increment_ratios.push(pairwise_sum(&terms) / n / h_scale);
    }
    let max_moment = per_step.iter().copied().fold(0.0f64, f64::max);
    let max_increment_ratio = increment_ratios.iter().copied().fold(0.0f64, f64::max);
    Ok(MomentStability { per_step, max_moment, increment_ratios, max_increment_ratio })
}

/// One point of the fixed-step increasing-`N` study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChaosPoint {
    pub n_particles: usize,
    /// Wasserstein-2 distance between the terminal ensembles of two
    /// independently driven runs of the same size.
    pub w2: f64,
}

const CHAOS_SEED_XOR: u64 = 0x9E37_79B9_7F4A_7C15;

/// Fixed-step, increasing-`N` study: for each size, two independent ensembles
/// (distinct seeds, independent Brownian drivers and initial draws) are run
/// and the W2 distance between their terminal empirical measures is reported.
/// Both ensembles approximate the same law, so the distance decreases as `N`
/// grows.
pub fn chaos_study(
    model: &Model,
    cfg: &SchemeConfig,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<ChaosPoint>> {
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let lattice_a = BrownianLattice::generate(seed, n, cfg.level, cfg.t_final)?;
        let lattice_b = BrownianLattice::generate(seed ^ CHAOS_SEED_XOR, n, cfg.level, cfg.t_final)?;
        let term_a = run_scheme(model, &lattice_a, cfg)?.terminal().to_vec();
        let term_b = run_scheme(model, &lattice_b, cfg)?.terminal().to_vec();
        let mu_a = EmpiricalMeasure::new(term_a)?;
        let mu_b = EmpiricalMeasure::new(term_b)?;
        out.push(ChaosPoint { n_particles: n, w2: w2_sorted(&mu_a, &mu_b)? });
    }
    Ok(out)
}

/// One row of the transform diagnostic grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransformGridRow {
    pub x: f64,
    pub g: f64,
    pub g_deriv: f64,
    pub g_second: f64,
    /// `|G^{-1}(G(x)) - x|`.
    pub roundtrip_err: f64,
}

/// Diagnostic dump of `(x, G, G', G'')` with inverse round-trip errors.
#[derive(Debug, Clone, Serialize)]
pub struct TransformGrid {
    pub rows: Vec<TransformGridRow>,
    pub max_roundtrip_error: f64,
    pub min_deriv: f64,
}

pub fn transform_grid(
    spec: &TransformSpec,
    lo: f64,
    hi: f64,
    n_points: usize,
    tol: f64,
) -> Result<TransformGrid> {
    if n_points < 2 || !(hi > lo) {
        return Err(Error::InvalidArgument("grid needs at least two points and hi > lo".into()));
    }
    let mut rows = Vec::with_capacity(n_points);
    let mut max_roundtrip_error = 0.0f64;
    let mut min_deriv = f64::INFINITY;
    for k in 0..n_points {
        let x = lo + (hi - lo) * k as f64 / (n_points - 1) as f64;
        let g = g_forward(x, spec);
        let deriv = g_deriv(x, spec);
        let second = g_second(x, spec);
        let back = g_inverse_scalar(g, spec, tol)?;
        let err = (back - x).abs();
        max_roundtrip_error = max_roundtrip_error.max(err);
        min_deriv = min_deriv.min(deriv);
        rows.push(TransformGridRow { x, g, g_deriv: deriv, g_second: second, roundtrip_err: err });
    }
    Ok(TransformGrid { rows, max_roundtrip_error, min_deriv })
}
