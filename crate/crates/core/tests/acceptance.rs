//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (visible with `--nocapture`). Tolerances are pinned in
//! the assertions.

// Index loops here mirror the term-by-term formulas on purpose.
#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use mvsde::analysis::{convergence_study_multi, occupation_study, StudyConfig};
use mvsde::measure::{w2_bruteforce, w2_sorted, EmpiricalMeasure};
use mvsde::model::{
    general_from_decomposable, modulated_jump_model, systemic_risk_model, Model, NeuronalModel,
    SigmaVariant,
};
use mvsde::simulate::{
    run_scheme, scheme1_decomposable_run, scheme1_general_run_with_stats, transformed_coeffs,
    transformed_drift_limits, BrownianLattice, Scheme, SchemeConfig,
};
use mvsde::transform::{g_deriv, g_forward, g_inverse_scalar, g_second};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

mod common;
use common::naive_coeffs;

const SEEDS: [u64; 3] = [42, 43, 44];

/// RMSE must be monotone nonincreasing in the level, allowing one inversion
/// at the noisiest coarse level.
fn assert_rmse_monotone(rmse: &[f64], context: &str) {
    let violations: Vec<usize> =
        (0..rmse.len() - 1).filter(|&i| rmse[i + 1] > rmse[i]).collect();
    assert!(
        violations.is_empty() || violations == [0],
        "{context}: rmse not monotone beyond the coarsest pair: {rmse:?}"
    );
}

fn paper_systemic_risk(a: f64) -> Model {
    Model::Decomposable(systemic_risk_model(a, -0.5, 0.5, 0.7).unwrap())
}

#[test]
fn criterion_01_transformed_scheme_strong_order() {
    let start = Instant::now();
    let model = paper_systemic_risk(1.0);
    let study = StudyConfig::new(Scheme::Scheme1Decomposable, 1000, 4, 9);
    let report = convergence_study_multi(&model, &study, &SEEDS).unwrap();
    assert_rmse_monotone(&report.rmse, "criterion 1");
    assert!(
        (0.4..=0.65).contains(&report.fitted_order),
        "fitted order {} outside [0.4, 0.65]; rmse {:?}",
        report.fitted_order,
        report.rmse
    );
    println!(
        "PASS criterion 1: scheme 1 on systemic risk, fitted order {:.3} in [0.40, 0.65] \
         ({:.1?})",
        report.fitted_order,
        start.elapsed()
    );
}

#[test]
fn criterion_02_direct_scheme_order_on_neuronal_model() {
    let start = Instant::now();
    let n = 1000;
    let neuronal = NeuronalModel::sample(
        0.02,
        0.01,
        0.1,
        SigmaVariant::Constant,
        n,
        1000,
        [0.0; 3],
        1.0,
        1.0,
        2.0,
    )
    .unwrap();
    let model = Model::Neuronal(neuronal);
    let study = StudyConfig::new(Scheme::Scheme2Direct, n, 4, 9);
    let report = convergence_study_multi(&model, &study, &SEEDS).unwrap();
    assert_rmse_monotone(&report.rmse, "criterion 2");
    assert!(
        (0.55..=0.95).contains(&report.fitted_order),
        "fitted order {} outside [0.55, 0.95]; rmse {:?}",
        report.fitted_order,
        report.rmse
    );
    println!(
        "PASS criterion 2: scheme 2 on the neuronal model, fitted order {:.3} in [0.55, 0.95] \
         ({:.1?})",
        report.fitted_order,
        start.elapsed()
    );
}

#[test]
fn criterion_03_direct_scheme_order_floor_on_systemic_risk() {
    let start = Instant::now();
    let mut summary = Vec::new();
    for a in [1.0, 5.0, 10.0] {
        let model = paper_systemic_risk(a);
        let study = StudyConfig::new(Scheme::Scheme2Direct, 1000, 4, 9);
        let report = convergence_study_multi(&model, &study, &SEEDS).unwrap();
        for pair in report.rmse.windows(2) {
            assert!(
                pair[1] < pair[0],
                "a={a}: rmse not strictly decreasing: {:?}",
                report.rmse
            );
        }
        assert!(
            report.fitted_order >= 2.0 / 9.0,
            "a={a}: fitted order {} below the 2/9 guarantee",
            report.fitted_order
        );
        summary.push(format!("a={a}: {:.3}", report.fitted_order));
    }
    println!(
        "PASS criterion 3: scheme 2 on systemic risk, orders >= 2/9 and rmse decreasing \
         ({}) ({:.1?})",
        summary.join(", "),
        start.elapsed()
    );
}

#[test]
fn criterion_04_transform_identities() {
    let start = Instant::now();
    let model = systemic_risk_model(1.0, -0.5, 0.5, 0.7).unwrap();
    let spec = model.transform_spec(0.9).unwrap();

    let n_points = 100_000;
    let mut max_roundtrip = 0.0f64;
    let mut min_deriv = f64::INFINITY;
    let mut max_d1_rel = 0.0f64;
    let mut max_d2_rel = 0.0f64;
    let (d1_step, d2_step) = (1e-6, 1e-8);
    for k in 0..n_points {
        let x = -10.0 + 20.0 * k as f64 / (n_points - 1) as f64;
        let back = g_inverse_scalar(g_forward(x, &spec), &spec, 1e-12).unwrap();
        max_roundtrip = max_roundtrip.max((back - x).abs());
        min_deriv = min_deriv.min(g_deriv(x, &spec));
        if x.abs() >= 1e-4 {
            let fd1 = (g_forward(x + d1_step, &spec) - g_forward(x - d1_step, &spec))
                / (2.0 * d1_step);
            let exact1 = g_deriv(x, &spec);
            max_d1_rel = max_d1_rel.max((fd1 - exact1).abs() / exact1.abs().max(1.0));
            let fd2 =
                (g_deriv(x + d2_step, &spec) - g_deriv(x - d2_step, &spec)) / (2.0 * d2_step);
            let exact2 = g_second(x, &spec);
            max_d2_rel = max_d2_rel.max((fd2 - exact2).abs() / exact2.abs().max(1.0));
        }
    }
    assert!(max_roundtrip <= 1e-10, "round trip error {max_roundtrip}");
    assert!(min_deriv > 0.5, "min dG/dx {min_deriv}");
    assert!(max_d1_rel <= 1e-6, "G' finite-difference mismatch {max_d1_rel}");
    assert!(max_d2_rel <= 1e-6, "G'' finite-difference mismatch {max_d2_rel}");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut max_gap = 0.0f64;
    for _ in 0..100 {
        let mu = EmpiricalMeasure::new(
            (0..9).map(|_| (rng.random::<f64>() - 0.5) * 6.0).collect(),
        )
        .unwrap();
        let (left, right) = transformed_drift_limits(&model, &spec, &mu);
        max_gap = max_gap.max((left - right).abs());
    }
    assert!(max_gap <= 1e-12, "transformed drift limit gap {max_gap}");

    println!(
        "PASS criterion 4: transform identities — roundtrip {max_roundtrip:.2e} <= 1e-10, \
         min dG/dx {min_deriv:.4} > 1/2, FD mismatches {max_d1_rel:.2e}/{max_d2_rel:.2e} <= 1e-6, \
         drift-limit gap {max_gap:.2e} <= 1e-12 ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_05_wasserstein_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    for trial in 0..1000 {
        let n = rng.random_range(1..=6);
        let mu = EmpiricalMeasure::new(
            (0..n).map(|_| (rng.random::<f64>() - 0.5) * 8.0).collect(),
        )
        .unwrap();
        let nu = EmpiricalMeasure::new(
            (0..n).map(|_| (rng.random::<f64>() - 0.5) * 8.0).collect(),
        )
        .unwrap();
        let sorted = w2_sorted(&mu, &nu).unwrap();
        let brute = w2_bruteforce(&mu, &nu).unwrap();
        assert_eq!(sorted, brute, "trial {trial}: {sorted} != {brute}");
    }
    println!(
        "PASS criterion 5: sorted W2 equals permutation brute force exactly on 1000 pairs \
         ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_06_coefficient_assembly_oracle() {
    let start = Instant::now();
    let model = modulated_jump_model(0.7, 0.3, 0.25, 1.0).unwrap();
    let gspec = model.transform_spec(0.9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = rng.random_range(2..=16);
        let states: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() - 0.5) * 4.0).collect();
        let coeffs = transformed_coeffs(&states, &model, &gspec).unwrap();
        let (naive_drift, naive_matrix) = naive_coeffs(&states, &model, &gspec);
        for i in 0..n {
            let drift_err = (coeffs.drift[i] - naive_drift[i]).abs();
            assert!(drift_err <= 1e-14, "trial {trial}: drift error {drift_err} at {i}");
            worst = worst.max(drift_err);
            for j in 0..n {
                let factored = coeffs.phi_bar[i] * coeffs.sigma_weights[j] / n as f64
                    + if i == j { coeffs.sigma_diag[i] } else { 0.0 };
                let sigma_err = (factored - naive_matrix[i][j]).abs();
                assert!(sigma_err <= 1e-14, "trial {trial}: sigma error {sigma_err}");
                worst = worst.max(sigma_err);
            }
        }
    }
    println!(
        "PASS criterion 6: factored coefficients match the term-by-term assembly, \
         worst deviation {worst:.2e} <= 1e-14 ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_07_hybrid_scheme_consistency() {
    let start = Instant::now();
    // Constant-alpha general model against the decomposable runner on the
    // same lattice.
    let dec = systemic_risk_model(1.0, -0.5, 0.5, 0.7).unwrap();
    let gen = general_from_decomposable(&dec, 50.0).unwrap();
    let lattice = BrownianLattice::generate(42, 64, 8, 1.0).unwrap();
    let spec = dec.transform_spec(0.9).unwrap();
    let reference = scheme1_decomposable_run(
        &dec,
        &spec,
        &lattice,
        &SchemeConfig::new(Scheme::Scheme1Decomposable, 8),
    )
    .unwrap();
    let gspec = gen.transform_spec(0.9).unwrap();
    let (hybrid, _) = scheme1_general_run_with_stats(
        &gen,
        &gspec,
        &lattice,
        &SchemeConfig::new(Scheme::Scheme1GeneralHybrid, 8),
    )
    .unwrap();
    let mut max_diff = 0.0f64;
    for step in 0..reference.n_rows() {
        for (a, b) in reference.row(step).iter().zip(hybrid.row(step)) {
            max_diff = max_diff.max((a - b).abs());
        }
    }
    assert!(max_diff <= 1e-12, "constant-alpha agreement {max_diff}");

    // Measured contraction of the implicit step on the modulated model.
    let modulated = modulated_jump_model(0.5, 0.3, 0.2, 1.0).unwrap();
    let mspec = modulated.transform_spec(0.9).unwrap();
    let (_, stats) = scheme1_general_run_with_stats(
        &modulated,
        &mspec,
        &lattice,
        &SchemeConfig::new(Scheme::Scheme1GeneralHybrid, 8),
    )
    .unwrap();
    assert!(
        stats.max_contraction < 0.5,
        "measured contraction {} not below one half",
        stats.max_contraction
    );

    println!(
        "PASS criterion 7: hybrid scheme agrees with the decomposable scheme to {max_diff:.2e} \
         <= 1e-12; measured contraction {:.3} < 1/2 ({:.1?})",
        stats.max_contraction,
        start.elapsed()
    );
}

#[test]
fn criterion_08_occupation_time_linearity() {
    let start = Instant::now();
    let model = paper_systemic_risk(1.0);
    let cfg = SchemeConfig::new(Scheme::Scheme2Direct, 8);
    let seeds: Vec<u64> = (50..55).collect();
    let eps = 0.05;
    let sweep = occupation_study(&model, &cfg, 1000, &seeds, &[eps, 2.0 * eps]).unwrap();
    let ratio = sweep[1].1 / sweep[0].1;
    assert!(
        (1.5..=2.5).contains(&ratio),
        "occupation ratio {ratio} outside [1.5, 2.5] (estimates {sweep:?})"
    );
    println!(
        "PASS criterion 8: occupation estimate(2 eps)/estimate(eps) = {ratio:.3} in [1.5, 2.5] \
         ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_09_cross_scheme_agreement() {
    let start = Instant::now();
    let model = paper_systemic_risk(1.0);
    let lattice = BrownianLattice::generate(42, 1000, 9, 1.0).unwrap();
    let mut distances = Vec::new();
    for level in 5..=9 {
        let t1 = run_scheme(&model, &lattice, &SchemeConfig::new(Scheme::Scheme1Decomposable, level))
            .unwrap();
        let t2 =
            run_scheme(&model, &lattice, &SchemeConfig::new(Scheme::Scheme2Direct, level)).unwrap();
        let mu1 = EmpiricalMeasure::new(t1.terminal().to_vec()).unwrap();
        let mu2 = EmpiricalMeasure::new(t2.terminal().to_vec()).unwrap();
        distances.push(w2_sorted(&mu1, &mu2).unwrap());
    }
    let violations: Vec<usize> =
        (0..distances.len() - 1).filter(|&i| distances[i + 1] >= distances[i]).collect();
    assert!(
        violations.is_empty() || violations == [0],
        "W2 between schemes not monotone beyond the coarsest pair: {distances:?}"
    );
    println!(
        "PASS criterion 9: cross-scheme W2 decreases over levels 5-9: \
         [{}] ({:.1?})",
        distances.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>().join(", "),
        start.elapsed()
    );
}

#[test]
fn criterion_10_thread_count_determinism() {
    let start = Instant::now();
    // Particle count above the parallel threshold so the thread pools are
    // genuinely exercised.
    let model = paper_systemic_risk(1.0);
    let study = StudyConfig::new(Scheme::Scheme2Direct, 2048, 4, 7);
    let run = || {
        let report = convergence_study_multi(&model, &study, &[42]).unwrap();
        (report.to_csv(), report.to_json())
    };
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let (csv1, json1) = pool1.install(run);
    let (csv4, json4) = pool4.install(run);
    assert_eq!(csv1, csv4, "CSV output differs across thread counts");
    assert_eq!(json1, json4, "JSON output differs across thread counts");
    println!(
        "PASS criterion 10: convergence CSV/JSON byte-identical across 1 and 4 threads \
         ({:.1?})",
        start.elapsed()
    );
}
