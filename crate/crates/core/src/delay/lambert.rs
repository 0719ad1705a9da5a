//! Complex Lambert W, all branches.
//!
//! Halley iteration on `w e^w - z`, started from a branch-dependent guess:
//! the series around the branch point `-1/e`, a Padé approximant around
//! zero for the principal branch, and the two-term asymptotic expansion
//! `L - ln L`, `L = ln z + 2 pi i k`, everywhere else.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE: f64 = 1e-15;
/// Required `|w e^w - z|`, relative to `max(1, |z|)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Branch `k` of the Lambert W function at `z`.
pub fn lambert_w(z: Complex64, k: i32) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambert_w of non-finite argument {z}"
        )));
    }
    if z == Complex64::new(0.0, 0.0) {
        return if k == 0 {
            Ok(z)
        } else {
            Err(Error::InvalidParameter(format!(
                "branch {k} of lambert_w is singular at 0"
            )))
        };
    }

    let mut w = initial_guess(z, k);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let next = halley_step(w, z);
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        let step = (next - w).norm();
        w = next;
        if step <= STEP_TOLERANCE * w.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    let residual = (w * w.exp() - z).norm();
    if !converged && residual > RESIDUAL_TOLERANCE * z.norm().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "lambert_w(z = {z}, k = {k}) did not converge (residual {residual:e})"
        )));
    }
    if residual > RESIDUAL_TOLERANCE * z.norm().max(1.0) {
        return Err(Error::NumericalFailure(format!(
            "lambert_w(z = {z}, k = {k}) residual {residual:e} above tolerance"
        )));
    }
    Ok(w)
}

fn initial_guess(z: Complex64, k: i32) -> Complex64 {
    let near_branch_point = (z + 1.0 / E).norm() < 0.3;
    match k {
        0 if near_branch_point => branch_point_series(z, 1.0),
        0 if pade_region(z) => pade_principal(z),
        // the two branches that meet W_0 at -1/e
        -1 if near_branch_point && z.im >= 0.0 => branch_point_series(z, -1.0),
        1 if near_branch_point && z.im < 0.0 => branch_point_series(z, -1.0),
        -1 if z.im == 0.0 && z.re < 0.0 && z.re >= -1.0 / E => Complex64::new((-z.re).ln(), 0.0),
        _ => asymptotic(z, k),
    }
}

/// `-1 + p - p^2/3 + 11 p^3/72` with `p = sign * sqrt(2 (e z + 1))`.
fn branch_point_series(z: Complex64, sign: f64) -> Complex64 {
    let p = (2.0 * (E * z + 1.0)).sqrt() * sign;
    -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)))
}

fn pade_region(z: Complex64) -> bool {
    -1.0 < z.re && z.re < 1.5 && z.im.abs() < 1.0 && -2.5 * z.im.abs() - 0.2 < z.re
}

/// (3, 2) Padé approximant of `W_0` about the origin.
fn pade_principal(z: Complex64) -> Complex64 {
    let num = 12.851_063_829_787_234 + z * (12.340_425_531_914_894 + z);
    let den = 32.531_914_893_617_02 + z * (14.340_425_531_914_894 + z);
    z * num / den
}

fn asymptotic(z: Complex64, k: i32) -> Complex64 {
    let l = z.ln() + Complex64::new(0.0, 2.0 * PI * k as f64);
    l - l.ln()
}

fn halley_step(w: Complex64, z: Complex64) -> Complex64 {
    if w.re >= 0.0 {
        // scaled by e^{-w} to keep the exponential bounded
        let f = w - z * (-w).exp();
        w - f / (w + 1.0 - (w + 2.0) * f / (2.0 * w + 2.0))
    } else {
        let ew = w.exp();
        let f = w * ew - z;
        w - f / (w * ew + ew - (w + 2.0) * f / (2.0 * w + 2.0))
    }
}
