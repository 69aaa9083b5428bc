//! `mvsde` — experiment runner for the McKean–Vlasov particle schemes.
//!
//! Subcommands: `simulate` (one run, terminal and optional path CSV),
//! `converge` (level-to-level RMSE study with order fit), `occupation`
//! (occupation-time epsilon sweep), `transform-check` (transform diagnostic
//! grid), `chaos` (fixed-step increasing-N ensemble distance table).
//!
//! Every output embeds the resolved configuration and seed in header
//! comments or JSON fields, enough to reproduce the run bit-exactly. On
//! failure the process exits nonzero with a machine-readable JSON error on
//! stderr and removes any partial outputs.

// Validation guards use `!(x > 0.0)` so NaNs are rejected along with
// out-of-domain values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use mvsde::analysis::{chaos_study, convergence_study_multi, occupation_study, transform_grid, StudyConfig};
use mvsde::measure::EmpiricalMeasure;
use mvsde::model::Model;
use mvsde::simulate::{run_scheme, BrownianLattice, SchemeConfig};
use mvsde::transform::TransformSpec;

use config::{parse_config, parse_override, ValidConfig};
use output::OutputTracker;

#[derive(Parser)]
#[command(name = "mvsde", version, about = "Particle-system simulator for McKean-Vlasov equations with a drift discontinuity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation; writes terminal states and an optional path dump.
    Simulate(RunArgs),
    /// Level-to-level RMSE convergence study with a fitted strong order.
    Converge(RunArgs),
    /// Occupation-time estimates for an epsilon sweep.
    Occupation(RunArgs),
    /// Transform diagnostic grid: G, its derivatives, inverse round trip.
    TransformCheck(RunArgs),
    /// Fixed-step increasing-N study of the distance between independent
    /// ensembles.
    Chaos(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set model.a=5.0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Config(Vec<String>),
    Simulation(mvsde::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<mvsde::Error> for CliError {
    fn from(e: mvsde::Error) -> Self {
        CliError::Simulation(e)
    }
}

impl CliError {
    fn to_json(&self) -> String {
        let value = match self {
            CliError::Config(details) => json!({
                "error": "invalid configuration",
                "kind": "config",
                "details": details,
            }),
            CliError::Simulation(e) => json!({
                "error": e.to_string(),
                "kind": "simulation",
            }),
            CliError::Io { path, source } => json!({
                "error": source.to_string(),
                "kind": "io",
                "path": path.display().to_string(),
            }),
        };
        serde_json::to_string_pretty(&value).expect("error serialization")
    }
}

fn main() {
    let cli = Cli::parse();
    let mut tracker = OutputTracker::new();
    match run(cli, &mut tracker) {
        Ok(()) => {}
        Err(err) => {
            tracker.cleanup();
            eprintln!("{}", err.to_json());
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let args = match &cli.command {
        Command::Simulate(a)
        | Command::Converge(a)
        | Command::Occupation(a)
        | Command::TransformCheck(a)
        | Command::Chaos(a) => a,
    };

    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.clone(), source })?;
    let mut overrides: Vec<(String, Value)> = Vec::new();
    for spec in &args.set {
        overrides.push(parse_override(spec).map_err(|e| CliError::Config(vec![e]))?);
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), json!(seed)));
    }
    if let Some(out) = &args.out {
        overrides.push(("out_dir".into(), json!(out)));
    }
    let valid = parse_config(&text, &overrides).map_err(CliError::Config)?;

    configure_threads(&valid);

    match cli.command {
        Command::Simulate(_) => cmd_simulate(&valid, tracker),
        Command::Converge(_) => cmd_converge(&valid, tracker),
        Command::Occupation(_) => cmd_occupation(&valid, tracker),
        Command::TransformCheck(_) => cmd_transform_check(&valid, tracker),
        Command::Chaos(_) => cmd_chaos(&valid, tracker),
    }
}

/// Thread-count hint: `MVSDE_THREADS` wins over the config key; zero leaves
/// the default pool. Output bytes do not depend on this hint.
fn configure_threads(valid: &ValidConfig) {
    let hint = std::env::var("MVSDE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(valid.config.threads);
    if hint > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(hint).build_global();
    }
}

fn scheme_config(valid: &ValidConfig, level: u32) -> SchemeConfig {
    SchemeConfig {
        scheme: valid.config.scheme,
        level,
        t_final: valid.config.t_final,
        inversion_tol: valid.config.inversion_tol,
        implicit_max_iters: valid.config.implicit_max_iters,
        safety: valid.config.safety,
    }
}

fn header(valid: &ValidConfig) -> String {
    format!("# config: {}\n# seed: {}\n", valid.echo, valid.config.seed)
}

fn out_path(valid: &ValidConfig, name: &str) -> PathBuf {
    Path::new(&valid.config.out_dir).join(name)
}

fn cmd_simulate(valid: &ValidConfig, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let cfg = &valid.config;
    let model = valid.model.build(cfg.n_particles, cfg.seed)?;
    let lattice = BrownianLattice::generate(cfg.seed, cfg.n_particles, cfg.level, cfg.t_final)?;
    let paths = run_scheme(&model, &lattice, &scheme_config(valid, cfg.level))?;

    let mut terminal = header(valid);
    terminal.push_str("particle,state\n");
    for (i, x) in paths.terminal().iter().enumerate() {
        terminal.push_str(&format!("{i},{x}\n"));
    }
    let terminal_path = out_path(valid, "terminal.csv");
    tracker.write(&terminal_path, &terminal)?;
    println!(
        "simulated {} under {} at level {}",
        valid.model.kind(),
        cfg.scheme,
        cfg.level
    );
    println!("wrote {}", terminal_path.display());

    if cfg.path_stride > 0 {
        let mut dump = header(valid);
        dump.push_str("step,t,particle,state\n");
        let h = paths.step_size();
        let last = paths.n_rows() - 1;
        for step in 0..paths.n_rows() {
            if step % cfg.path_stride != 0 && step != last {
                continue;
            }
            let t = step as f64 * h;
            for (i, x) in paths.row(step).iter().enumerate() {
                dump.push_str(&format!("{step},{t},{i},{x}\n"));
            }
        }
        let dump_path = out_path(valid, "paths.csv");
        tracker.write(&dump_path, &dump)?;
        println!("wrote {}", dump_path.display());
    }
    Ok(())
}

fn cmd_converge(valid: &ValidConfig, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let cfg = &valid.config;
    let model = valid.model.build(cfg.n_particles, cfg.seed)?;
    let study = StudyConfig {
        scheme: cfg.scheme,
        n_particles: cfg.n_particles,
        level_min: cfg.level_min,
        level_max: cfg.level_max,
        t_final: cfg.t_final,
        inversion_tol: cfg.inversion_tol,
        implicit_max_iters: cfg.implicit_max_iters,
        safety: cfg.safety,
    };
    let report = convergence_study_multi(&model, &study, &valid.seeds())?;

    let csv_path = out_path(valid, "converge.csv");
    let mut csv = header(valid);
    csv.push_str(&report.to_csv());
    tracker.write(&csv_path, &csv)?;

    let json_path = out_path(valid, "converge.json");
    let summary = json!({
        "config": serde_json::from_str::<Value>(&valid.echo).expect("echo is valid JSON"),
        "report": report,
    });
    tracker.write(&json_path, &serde_json::to_string_pretty(&summary).expect("summary"))?;

    println!(
        "fitted order {} (residual {}, trimmed_coarsest {})",
        report.fitted_order, report.fit_residual, report.trimmed_coarsest
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

fn cmd_occupation(valid: &ValidConfig, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let cfg = &valid.config;
    let model = valid.model.build(cfg.n_particles, cfg.seed)?;
    let sweep = occupation_study(
        &model,
        &scheme_config(valid, cfg.level),
        cfg.n_particles,
        &valid.seeds(),
        &cfg.eps_values,
    )?;
    let mut csv = header(valid);
    csv.push_str("eps,estimate\n");
    for (eps, estimate) in &sweep {
        csv.push_str(&format!("{eps},{estimate}\n"));
    }
    let path = out_path(valid, "occupation.csv");
    tracker.write(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_transform_check(valid: &ValidConfig, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let cfg = &valid.config;
    let spec = constant_transform_spec(valid)?;
    let grid = transform_grid(&spec, -10.0, 10.0, 100_001, cfg.inversion_tol)?;

    let mut csv = header(valid);
    csv.push_str("x,g,g_deriv,g_second,roundtrip_err\n");
    for row in &grid.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.x, row.g, row.g_deriv, row.g_second, row.roundtrip_err
        ));
    }
    let csv_path = out_path(valid, "transform_check.csv");
    tracker.write(&csv_path, &csv)?;

    let summary = json!({
        "config": serde_json::from_str::<Value>(&valid.echo).expect("echo is valid JSON"),
        "alpha": spec.alpha,
        "c": spec.c,
        "max_roundtrip_error": grid.max_roundtrip_error,
        "min_deriv": grid.min_deriv,
    });
    let json_path = out_path(valid, "transform_check.json");
    tracker.write(&json_path, &serde_json::to_string_pretty(&summary).expect("summary"))?;

    println!(
        "max roundtrip error {}, min dG/dx {}",
        grid.max_roundtrip_error, grid.min_deriv
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(())
}

/// Constant-alpha transform parameters for the diagnostic grid. General
/// models freeze alpha at the initial empirical measure.
fn constant_transform_spec(valid: &ValidConfig) -> Result<TransformSpec, CliError> {
    let cfg = &valid.config;
    match valid.model.build(cfg.n_particles, cfg.seed)? {
        Model::Decomposable(m) => Ok(m.transform_spec(cfg.safety)?),
        Model::General(m) => {
            let initial = m.initial.sample(cfg.n_particles, cfg.seed);
            let mu0 = EmpiricalMeasure::new(initial)?;
            let gspec = m.transform_spec(cfg.safety)?;
            Ok(gspec.fix_alpha(m.alpha.eval(&mu0))?)
        }
        Model::Neuronal(_) => Err(CliError::Simulation(mvsde::Error::UnsupportedInput(
            "the neuronal model has no removable jump; transform-check requires a jump model"
                .into(),
        ))),
    }
}

fn cmd_chaos(valid: &ValidConfig, tracker: &mut OutputTracker) -> Result<(), CliError> {
    let cfg = &valid.config;
    let max_n = *cfg.chaos_sizes.iter().max().expect("validated nonempty");
    let model = valid.model.build(max_n, cfg.seed)?;
    let points = chaos_study(&model, &scheme_config(valid, cfg.level), &cfg.chaos_sizes, cfg.seed)?;
    let mut csv = header(valid);
    csv.push_str("n_particles,w2\n");
    for point in &points {
        csv.push_str(&format!("{},{}\n", point.n_particles, point.w2));
    }
    let path = out_path(valid, "chaos.csv");
    tracker.write(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
