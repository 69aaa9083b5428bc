//! Shared test oracles. Everything here recomputes quantities from first
//! principles, independent of the factored production paths.

// Index loops here mirror the term-by-term formulas on purpose.
#![allow(clippy::needless_range_loop)]

use mvsde::measure::EmpiricalMeasure;
use mvsde::model::GeneralModel;
use mvsde::transform::{phi_bar_derivs, GeneralTransformSpec};

/// Term-by-term assembly of the transformed drift vector and the full
/// diffusion matrix, looping over every particle pair.
pub fn naive_coeffs(
    states: &[f64],
    model: &GeneralModel,
    gspec: &GeneralTransformSpec,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = states.len();
    let nf = n as f64;
    let mu = EmpiricalMeasure::new(states.to_vec()).unwrap();
    let a = model.alpha.eval(&mu);
    let c = gspec.c;
    let prepared = model.b.prepare(&mu);

    let phibar = |x: f64| phi_bar_derivs(x, c).unwrap().0;
    let phibar1 = |x: f64| phi_bar_derivs(x, c).unwrap().1;
    let phibar2 = |x: f64| phi_bar_derivs(x, c).unwrap().2;
    let sigma = |x: f64| (model.sigma)(x);

    let mut drift = vec![0.0; n];
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        let xi = states[i];
        let mut b_i = (1.0 + a * phibar1(xi)) * prepared(xi)
            + 0.5 * sigma(xi) * sigma(xi) * a * phibar2(xi);
        for k in 0..n {
            let xk = states[k];
            b_i += model.alpha.d_mu(&mu, xk) * phibar(xi) * prepared(xk) / nf;
            b_i += 0.5 * model.alpha.dy_d_mu(&mu, xk) * phibar(xi) * sigma(xk) * sigma(xk) / nf;
            b_i += 0.5 * model.alpha.d2_mu(&mu, xk, xk) * phibar(xi) * sigma(xk) * sigma(xk)
                / (nf * nf);
        }
        b_i += model.alpha.d_mu(&mu, xi) * phibar1(xi) * sigma(xi) * sigma(xi) / nf;
        drift[i] = b_i;

        for j in 0..n {
            let xj = states[j];
            let mut entry = phibar(xi) * model.alpha.d_mu(&mu, xj) * sigma(xj) / nf;
            if i == j {
                entry += (1.0 + a * phibar1(xi)) * sigma(xi);
            }
            matrix[i][j] = entry;
        }
    }
    (drift, matrix)
}
