//! The discontinuity-removing transform.
//!
//! A drift with a single jump at zero is removed by the change of variable
//! `Z = G(X)` with
//!
//! ```text
//! G(x) = x + alpha * phibar(x),      phibar(x) = x|x| * phi(x/c),
//! phi(u) = (1 - u^2)^3  for |u| <= 1,  0 otherwise,
//! ```
//!
//! where `alpha = (b(0-) - b(0+)) / (2 sigma^2(0))` and the bump radius `c`
//! satisfies `c * |alpha| < 1`. Under that restriction `dG/dx > 1/2`
//! everywhere, so `G` is a bi-Lipschitz bijection of the real line and equals
//! the identity outside `[-c, c]`.
//!
//! All bump evaluations use closed forms rather than generic differentiation:
//! they are exact at the boundary `|x| = c` and cheap enough for the particle
//! loops. With `u = x/c` and `w = u^2`:
//!
//! ```text
//! phibar  (x) = x|x| (1 - w)^3
//! phibar' (x) = 2|x| (1 - w)^2 (1 - 4w)
//! phibar''(x) = sign(x) * [ 2 (1 - w)^2 (1 - 4w) - 24 w (1 - w)(1 - 2w) ]
//! ```
//!
//! `phibar''` jumps from -2 to +2 across zero; at exactly `x = 0` the
//! right limit is returned, and callers that need a one-sided value pass a
//! [`Side`]. The scheme evaluates second derivatives only at sampled states,
//! which are almost surely nonzero, so the convention affects measure-zero
//! inputs only.

use crate::error::{Error, Result};

/// Constant-jump transform parameters: `G(x) = x + alpha * phibar(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    /// Jump coefficient `alpha = (b(0-) - b(0+)) / (2 sigma^2(0))`.
    pub alpha: f64,
    /// Bump radius; `G(x) = x` for `|x| >= c`. Requires `c > 0`, `c|alpha| < 1`.
    pub c: f64,
}

impl TransformSpec {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !alpha.is_finite() || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "transform parameters must be finite, got alpha={alpha}, c={c}"
            )));
        }
        if c <= 0.0 {
            return Err(Error::InvalidArgument(format!("bump radius must be positive, got c={c}")));
        }
        if c * alpha.abs() >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "need c * |alpha| < 1 for invertibility, got c={c}, alpha={alpha}"
            )));
        }
        Ok(Self { alpha, c })
    }

    /// Identity transform (`alpha = 0`), for models without a jump.
    pub fn identity() -> Self {
        Self { alpha: 0.0, c: 1.0 }
    }
}

/// Measure-dependent transform parameters: uniform bounds on the jump
/// functional and its Lions derivative, plus the bump radius.
///
/// Invertibility of the per-particle vector transform requires
/// `c < min(1, 1/(alpha_sup + dalpha_sup))`; the constructor enforces it.
/// The second requirement on `c` — that the measured fixed-point contraction
/// of the implicit inversion stays below one half — can only be observed at
/// run time and is reported by the hybrid scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralTransformSpec {
    /// Uniform bound on `|alpha(mu)|`.
    pub alpha_sup: f64,
    /// Uniform bound on `|d_mu alpha(mu)(y)|`.
    pub dalpha_sup: f64,
    /// Bump radius.
    pub c: f64,
}

impl GeneralTransformSpec {
    pub fn new(alpha_sup: f64, dalpha_sup: f64, c: f64) -> Result<Self> {
        if !(alpha_sup.is_finite() && dalpha_sup.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument(
                "general transform parameters must be finite".into(),
            ));
        }
        if alpha_sup < 0.0 || dalpha_sup < 0.0 {
            return Err(Error::InvalidArgument(
                "alpha_sup and dalpha_sup are bounds and must be nonnegative".into(),
            ));
        }
        if c <= 0.0 {
            return Err(Error::InvalidArgument(format!("bump radius must be positive, got c={c}")));
        }
        let bound = invertibility_bound(alpha_sup, dalpha_sup);
        if c >= bound {
            return Err(Error::InvalidArgument(format!(
                "need c < min(1, 1/(alpha_sup + dalpha_sup)) = {bound}, got c={c}"
            )));
        }
        Ok(Self { alpha_sup, dalpha_sup, c })
    }

    /// Constant-alpha spec for a given realised value of the jump functional.
    /// `|alpha_value|` may not exceed `alpha_sup`.
    pub fn fix_alpha(&self, alpha_value: f64) -> Result<TransformSpec> {
        if !alpha_value.is_finite() || alpha_value.abs() > self.alpha_sup + ALPHA_SUP_SLACK {
            return Err(Error::BoundViolation(format!(
                "|alpha(mu)| = {} exceeds declared bound alpha_sup = {}",
                alpha_value.abs(),
                self.alpha_sup
            )));
        }
        // c * |alpha| <= c * alpha_sup < 1 by construction.
        Ok(TransformSpec { alpha: alpha_value, c: self.c })
    }
}

/// Absolute slack applied when checking realised `alpha` values against their
/// declared bound, so that rounding in the functional evaluation does not
/// trip the guard.
const ALPHA_SUP_SLACK: f64 = 1e-9;

fn invertibility_bound(alpha_sup: f64, dalpha_sup: f64) -> f64 {
    let s = alpha_sup + dalpha_sup;
    if s == 0.0 {
        1.0
    } else {
        (1.0 / s).min(1.0)
    }
}

/// Side selector for one-sided values at the discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `phibar` and its first two derivatives at `x`, with the bump radius `c`.
///
/// All three vanish for `|x| >= c`. The second derivative at exactly `x = 0`
/// is the right limit `+2`; see [`phi_bar_second_one_sided`] for the
/// one-sided variant.
pub fn phi_bar_derivs(x: f64, c: f64) -> Result<(f64, f64, f64)> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("bump radius must be positive, got c={c}")));
    }
    Ok(phi_bar_derivs_unchecked(x, c))
}

#[inline]
pub(crate) fn phi_bar_derivs_unchecked(x: f64, c: f64) -> (f64, f64, f64) {
    let ax = x.abs();
    if ax >= c {
        return (0.0, 0.0, 0.0);
    }
    let u = x / c;
    let w = u * u;
    let om = 1.0 - w;
    let om2 = om * om;
    let s = if x < 0.0 { -1.0 } else { 1.0 }; // sign convention: right limit at 0
    let d0 = x * ax * (om2 * om);
    let d1 = 2.0 * ax * om2 * (1.0 - 4.0 * w);
    let d2 = s * (2.0 * om2 * (1.0 - 4.0 * w) - 24.0 * w * om * (1.0 - 2.0 * w));
    (d0, d1, d2)
}

/// One-sided second derivative of `phibar`; differs from
/// [`phi_bar_derivs`] only at `x = 0`, where the jump is `+2` vs `-2`.
pub fn phi_bar_second_one_sided(x: f64, c: f64, side: Side) -> Result<f64> {
    let (_, _, d2) = phi_bar_derivs(x, c)?;
    if x == 0.0 && side == Side::Left {
        Ok(-d2)
    } else {
        Ok(d2)
    }
}

/// Jump coefficient from the one-sided drift limits:
/// `alpha = (b(0-) - b(0+)) / (2 sigma^2(0))`.
pub fn alpha_from_jump(b_left: f64, b_right: f64, sigma0: f64) -> Result<f64> {
    if !(b_left.is_finite() && b_right.is_finite() && sigma0.is_finite()) {
        return Err(Error::InvalidArgument("jump data must be finite".into()));
    }
    if sigma0 == 0.0 {
        return Err(Error::DegenerateDiffusion);
    }
    Ok((b_left - b_right) / (2.0 * sigma0 * sigma0))
}

/// Bump radius from the invertibility bound, scaled by a safety factor in
/// `(0, 1)`: `safety * min(1, 1/(alpha_sup + dalpha_sup))`.
pub fn choose_c(alpha_sup: f64, dalpha_sup: f64, safety: f64) -> Result<f64> {
    if !(alpha_sup.is_finite() && dalpha_sup.is_finite() && safety.is_finite()) {
        return Err(Error::InvalidArgument("choose_c inputs must be finite".into()));
    }
    if alpha_sup < 0.0 || dalpha_sup < 0.0 {
        return Err(Error::InvalidArgument("alpha bounds must be nonnegative".into()));
    }
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!("safety must lie in (0,1), got {safety}")));
    }
    Ok(safety * invertibility_bound(alpha_sup, dalpha_sup))
}

/// `G(x) = x + alpha * phibar(x)`.
#[inline]
pub fn g_forward(x: f64, spec: &TransformSpec) -> f64 {
    let ax = x.abs();
    if ax >= spec.c {
        return x;
    }
    let u = x / spec.c;
    let om = 1.0 - u * u;
    x + spec.alpha * (x * ax * (om * om * om))
}

/// `dG/dx = 1 + alpha * phibar'(x)`; strictly greater than `1/2` whenever
/// `c |alpha| < 1`, and within `c|alpha|/2` of one everywhere.
#[inline]
pub fn g_deriv(x: f64, spec: &TransformSpec) -> f64 {
    let (_, d1, _) = phi_bar_derivs_unchecked(x, spec.c);
    1.0 + spec.alpha * d1
}

/// `d2G/dx2 = alpha * phibar''(x)` (right limit at `x = 0`).
#[inline]
pub fn g_second(x: f64, spec: &TransformSpec) -> f64 {
    let (_, _, d2) = phi_bar_derivs_unchecked(x, spec.c);
    spec.alpha * d2
}

/// Maximum attainable iterations for the safeguarded Newton inversion.
const INVERSION_MAX_ITERS: usize = 200;

/// Invert `G` at `z`: returns `x` with `|G(x) - z| <= tol`.
///
/// Outside the bump (`|z| >= c`) the inverse is `z` itself, returned exactly.
/// Inside, Newton from `x0 = z` converges globally because `dG/dx > 1/2`; a
/// bisection fallback on the bracket `[z - |alpha| c^2, z + |alpha| c^2]`
/// guards floating-point edge cases.
pub fn g_inverse_scalar(z: f64, spec: &TransformSpec, tol: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite, got {z}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if z.abs() >= spec.c || spec.alpha == 0.0 {
        return Ok(z);
    }

    // |G(x) - x| = |alpha||phibar(x)| <= |alpha| c^2, so the root is bracketed.
    let radius = spec.alpha.abs() * spec.c * spec.c;
    let mut lo = z - radius;
    let mut hi = z + radius;
    let mut x = z;

    for _ in 0..INVERSION_MAX_ITERS {
        let residual = g_forward(x, spec) - z;
        if residual.abs() <= tol {
            return Ok(x);
        }
        // G is increasing, so the residual sign locates the root.
        if residual > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = residual / g_deriv(x, spec);
        let candidate = x - step;
        x = if candidate > lo && candidate < hi { candidate } else { 0.5 * (lo + hi) };
    }
    Err(Error::NumericFailure(format!(
        "transform inversion did not converge at z={z} (alpha={}, c={}, tol={tol})",
        spec.alpha, spec.c
    )))
}

/// Measure-dependent transform `G(x, mu) = x + alpha(mu) * phibar(x)` for a
/// realised value `alpha_value = alpha(mu)`.
///
/// Fails with a spec violation when `|alpha_value|` exceeds the declared
/// bound, since that invalidates the invertibility condition on `c`.
pub fn g_forward_measure(x: f64, alpha_value: f64, gspec: &GeneralTransformSpec) -> Result<f64> {
    let spec = gspec.fix_alpha(alpha_value)?;
    Ok(g_forward(x, &spec))
}
