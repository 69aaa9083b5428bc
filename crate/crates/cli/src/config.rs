//! Experiment configuration: JSON schema, overrides, and validation.
//!
//! Configurations are JSON documents with a `model` object selected by its
//! `kind`. Unknown keys are rejected everywhere, and domain validation
//! reports *all* violations, not just the first. Individual keys can be
//! overridden from the command line with `--set path.to.key=value`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use mvsde::model::{
    modulated_jump_model, systemic_risk_model, InitialLaw, Model, NeuronalModel, SigmaVariant,
};
use mvsde::simulate::Scheme;

fn default_n_seeds() -> u32 {
    1
}
fn default_level() -> u32 {
    8
}
fn default_level_min() -> u32 {
    4
}
fn default_level_max() -> u32 {
    9
}
fn default_t_final() -> f64 {
    1.0
}
fn default_inversion_tol() -> f64 {
    1e-12
}
fn default_implicit_max_iters() -> usize {
    50
}
fn default_safety() -> f64 {
    0.9
}
fn default_eps_values() -> Vec<f64> {
    vec![0.025, 0.05, 0.1, 0.2]
}
fn default_chaos_sizes() -> Vec<usize> {
    vec![125, 250, 500, 1000, 2000]
}
fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Model selector; an object with a `kind` key (see [`ModelParams`]).
    pub model: Value,
    pub scheme: Scheme,
    pub seed: u64,
    /// Seeds `seed, seed+1, ...` are used when a study averages over seeds.
    #[serde(default = "default_n_seeds")]
    pub n_seeds: u32,
    pub n_particles: usize,
    /// Level for single-level commands (simulate, occupation, chaos).
    #[serde(default = "default_level")]
    pub level: u32,
    #[serde(default = "default_level_min")]
    pub level_min: u32,
    #[serde(default = "default_level_max")]
    pub level_max: u32,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_inversion_tol")]
    pub inversion_tol: f64,
    #[serde(default = "default_implicit_max_iters")]
    pub implicit_max_iters: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Path-dump stride for `simulate`; 0 disables the dump.
    #[serde(default)]
    pub path_stride: usize,
    #[serde(default = "default_eps_values")]
    pub eps_values: Vec<f64>,
    #[serde(default = "default_chaos_sizes")]
    pub chaos_sizes: Vec<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Thread-count hint; 0 leaves the pool at its default size. The
    /// `MVSDE_THREADS` environment variable takes precedence.
    #[serde(default)]
    pub threads: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemicRiskParams {
    pub a: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub sigma0: f64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronalParams {
    pub lambda_hat: f64,
    pub kappa: f64,
    pub epsilon: f64,
    #[serde(default = "default_sigma_variant")]
    pub sigma_variant: String,
    #[serde(default)]
    pub xi_mean: [f64; 3],
    #[serde(default = "default_xi_sd")]
    pub xi_sd: f64,
    #[serde(default = "default_eta_mean")]
    pub eta_mean: f64,
    #[serde(default = "default_eta_sd")]
    pub eta_sd: f64,
}

fn default_sigma_variant() -> String {
    "constant".into()
}
fn default_xi_sd() -> f64 {
    1.0
}
fn default_eta_mean() -> f64 {
    1.0
}
fn default_eta_sd() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatedJumpParams {
    pub a: f64,
    pub k1: f64,
    pub k2: f64,
    pub sigma0: f64,
    #[serde(default)]
    pub init_mean: f64,
    #[serde(default = "default_init_sd")]
    pub init_sd: f64,
}

fn default_init_sd() -> f64 {
    1.0
}

/// Typed model parameters, dispatched on the `kind` key.
#[derive(Debug, Clone)]
pub enum ModelParams {
    SystemicRisk(SystemicRiskParams),
    Neuronal(NeuronalParams),
    ModulatedJump(ModulatedJumpParams),
}

impl ModelParams {
    pub fn from_value(value: &Value) -> Result<Self, String> {
        let obj = value
            .as_object()
            .ok_or_else(|| "model must be an object with a `kind` key".to_string())?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| "model.kind must be a string".to_string())?
            .to_string();
        let mut rest = obj.clone();
        rest.remove("kind");
        let rest = Value::Object(rest);
        match kind.as_str() {
            "systemic_risk" => serde_json::from_value(rest)
                .map(ModelParams::SystemicRisk)
                .map_err(|e| format!("model: {e}")),
            "neuronal" => serde_json::from_value(rest)
                .map(ModelParams::Neuronal)
                .map_err(|e| format!("model: {e}")),
            "modulated_jump" => serde_json::from_value(rest)
                .map(ModelParams::ModulatedJump)
                .map_err(|e| format!("model: {e}")),
            other => Err(format!(
                "model.kind `{other}` is not one of systemic_risk, neuronal, modulated_jump"
            )),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelParams::SystemicRisk(_) => "systemic_risk",
            ModelParams::Neuronal(_) => "neuronal",
            ModelParams::ModulatedJump(_) => "modulated_jump",
        }
    }

    /// All parameter-domain violations.
    pub fn domain_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self {
            ModelParams::SystemicRisk(p) => {
                if !(p.kappa1 < 0.0) {
                    errors.push(format!("model.kappa1 must be negative, got {}", p.kappa1));
                }
                if !(p.kappa2 > 0.0) {
                    errors.push(format!("model.kappa2 must be positive, got {}", p.kappa2));
                }
                if !(p.sigma0 > 0.0) {
                    errors.push(format!(
                        "model.sigma0 must be positive (the diffusion may not degenerate at \
                         the discontinuity), got {}",
                        p.sigma0
                    ));
                }
                if !(p.a >= 0.0) {
                    errors.push(format!("model.a must be nonnegative, got {}", p.a));
                }
            }
            ModelParams::Neuronal(p) => {
                if !(p.lambda_hat >= 0.0) {
                    errors.push(format!("model.lambda_hat must be nonnegative, got {}", p.lambda_hat));
                }
                if !(p.kappa > 0.0 && p.kappa < 1.0) {
                    errors.push(format!("model.kappa must lie in (0,1), got {}", p.kappa));
                }
                if !(p.epsilon > 0.0) {
                    errors.push(format!("model.epsilon must be positive, got {}", p.epsilon));
                }
                if !(p.xi_sd > 0.0) {
                    errors.push(format!("model.xi_sd must be positive, got {}", p.xi_sd));
                }
                if !(p.eta_sd >= 0.0) {
                    errors.push(format!("model.eta_sd must be nonnegative, got {}", p.eta_sd));
                }
                if !matches!(p.sigma_variant.as_str(), "constant" | "affine") {
                    errors.push(format!(
                        "model.sigma_variant must be `constant` or `affine`, got `{}`",
                        p.sigma_variant
                    ));
                }
            }
            ModelParams::ModulatedJump(p) => {
                if !(p.sigma0 > 0.0) {
                    errors.push(format!(
                        "model.sigma0 must be positive (the diffusion may not degenerate at \
                         the discontinuity), got {}",
                        p.sigma0
                    ));
                }
                if !(p.a >= 0.0) {
                    errors.push(format!("model.a must be nonnegative, got {}", p.a));
                }
                if !(p.init_sd >= 0.0) {
                    errors.push(format!("model.init_sd must be nonnegative, got {}", p.init_sd));
                }
            }
        }
        errors
    }

    /// Scheme/model compatibility message, if the pair is unsupported.
    pub fn scheme_error(&self, scheme: Scheme) -> Option<String> {
        match (self, scheme) {
            (ModelParams::Neuronal(_), Scheme::Scheme1Decomposable | Scheme::Scheme1GeneralHybrid) => {
                Some("the neuronal model is particle-native and runs under scheme2_direct only".into())
            }
            (ModelParams::ModulatedJump(_), Scheme::Scheme1Decomposable | Scheme::Scheme2Direct) => {
                Some("the modulated jump model requires scheme1_general_hybrid".into())
            }
            (ModelParams::SystemicRisk(_), Scheme::Scheme1GeneralHybrid) => Some(
                "systemic risk is decomposable; use scheme1_decomposable or scheme2_direct".into(),
            ),
            _ => None,
        }
    }

    /// Builds the runnable model. `n` bounds the particle count of any run
    /// (neuron locations are sampled once for the largest ensemble).
    pub fn build(&self, n: usize, seed: u64) -> mvsde::Result<Model> {
        match self {
            ModelParams::SystemicRisk(p) => {
                let mut model = systemic_risk_model(p.a, p.kappa1, p.kappa2, p.sigma0)?;
                model.initial = InitialLaw::Dirac(p.x0);
                Ok(Model::Decomposable(model))
            }
            ModelParams::Neuronal(p) => {
                let variant = if p.sigma_variant == "affine" {
                    SigmaVariant::Affine
                } else {
                    SigmaVariant::Constant
                };
                let model = NeuronalModel::sample(
                    p.lambda_hat,
                    p.kappa,
                    p.epsilon,
                    variant,
                    n,
                    seed,
                    p.xi_mean,
                    p.xi_sd,
                    p.eta_mean,
                    p.eta_sd,
                )?;
                Ok(Model::Neuronal(model))
            }
            ModelParams::ModulatedJump(p) => {
                let mut model = modulated_jump_model(p.a, p.k1, p.k2, p.sigma0)?;
                model.initial = InitialLaw::Normal { mean: p.init_mean, sd: p.init_sd };
                Ok(Model::General(model))
            }
        }
    }
}

/// A parsed and fully validated configuration.
#[derive(Debug, Clone)]
pub struct ValidConfig {
    pub config: ExperimentConfig,
    pub model: ModelParams,
    /// Canonical one-line JSON echo of the resolved configuration.
    pub echo: String,
}

impl ValidConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.config.n_seeds as u64).map(|k| self.config.seed + k).collect()
    }
}

/// Parses and validates a configuration document, applying `--set` overrides
/// first. Returns either the validated configuration or every validation
/// error found.
pub fn parse_config(text: &str, overrides: &[(String, Value)]) -> Result<ValidConfig, Vec<String>> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| vec![format!("malformed JSON: {e}")])?;
    for (path, override_value) in overrides {
        set_path(&mut value, path, override_value.clone()).map_err(|e| vec![e])?;
    }
    let config: ExperimentConfig =
        serde_json::from_value(value.clone()).map_err(|e| vec![format!("schema: {e}")])?;

    let mut errors = Vec::new();
    let model = match ModelParams::from_value(&config.model) {
        Ok(model) => Some(model),
        Err(e) => {
            errors.push(e);
            None
        }
    };
    if let Some(model) = &model {
        errors.extend(model.domain_errors());
        if let Some(msg) = model.scheme_error(config.scheme) {
            errors.push(msg);
        }
    }

    if config.n_particles == 0 {
        errors.push("n_particles must be at least 1".into());
    }
    if config.n_seeds == 0 {
        errors.push("n_seeds must be at least 1".into());
    }
    if config.level > 26 {
        errors.push(format!("level {} exceeds the lattice guard of 26", config.level));
    }
    if config.level_min < 2 {
        errors.push(format!("level_min must be at least 2, got {}", config.level_min));
    }
    if config.level_max > 26 {
        errors.push(format!("level_max {} exceeds the lattice guard of 26", config.level_max));
    }
    if config.level_max < config.level_min + 3 {
        errors.push(format!(
            "level_max must be at least level_min + 3 for an order fit, got {}..{}",
            config.level_min, config.level_max
        ));
    }
    if !(config.t_final > 0.0 && config.t_final.is_finite()) {
        errors.push(format!("t_final must be positive and finite, got {}", config.t_final));
    }
    if !(config.inversion_tol > 0.0) {
        errors.push(format!("inversion_tol must be positive, got {}", config.inversion_tol));
    }
    if config.implicit_max_iters == 0 {
        errors.push("implicit_max_iters must be at least 1".into());
    }
    if !(config.safety > 0.0 && config.safety < 1.0) {
        errors.push(format!("safety must lie in (0,1), got {}", config.safety));
    }
    if config.eps_values.is_empty() || config.eps_values.iter().any(|&e| !(e > 0.0)) {
        errors.push("eps_values must be a nonempty list of positive numbers".into());
    }
    if config.chaos_sizes.is_empty() || config.chaos_sizes.contains(&0) {
        errors.push("chaos_sizes must be a nonempty list of positive sizes".into());
    }

    match (errors.is_empty(), model) {
        (true, Some(model)) => {
            let echo = serde_json::to_string(&config).expect("config echo");
            Ok(ValidConfig { config, model, echo })
        }
        _ => Err(errors),
    }
}

/// Sets `path` (dot-separated) inside a JSON value, creating intermediate
/// objects as needed.
fn set_path(root: &mut Value, path: &str, new_value: Value) -> Result<(), String> {
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("--set path `{path}` has an empty segment"));
    }
    for part in &parts[..parts.len() - 1] {
        let obj = cursor
            .as_object_mut()
            .ok_or_else(|| format!("--set path `{path}`: `{part}` is not an object"))?;
        cursor = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cursor
        .as_object_mut()
        .ok_or_else(|| format!("--set path `{path}` does not end inside an object"))?;
    obj.insert(parts[parts.len() - 1].to_string(), new_value);
    Ok(())
}

/// Parses a `key=value` override; the value is JSON when it parses as JSON,
/// a bare string otherwise.
pub fn parse_override(spec: &str) -> Result<(String, Value), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("--set expects key=value, got `{spec}`"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}
