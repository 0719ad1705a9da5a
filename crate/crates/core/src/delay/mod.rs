//! Delay margins and rightmost characteristic roots.
//!
//! The characteristic function `det(sI - M e^{-s tau})` factors into one
//! scalar equation `s e^{s tau} = lambda_i` per eigenvalue of `M`, so each
//! root is `W_k(tau lambda_i) / tau` for some Lambert W branch `k`. A root
//! of eigenvalue `lambda = R e^{i theta}` first reaches the imaginary axis
//! at `tau = (theta - pi/2) / R` with frequency `R`.

mod lambert;
mod pseudospectral;
mod roots;
mod sweep;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::system::{AugmentedSystem, Spectrum, DEFAULT_NULL_TOLERANCE};

pub use lambert::{lambert_w, RESIDUAL_TOLERANCE as LAMBERT_RESIDUAL_TOLERANCE};
pub use pseudospectral::{
    chebyshev_differentiation, generator_matrix, rightmost_root_of_matrix, rightmost_root_oracle,
    DEFAULT_ORDER, MIN_ORDER,
};
pub use roots::{
    rightmost_root, rightmost_root_or_eigenvalue, RightmostRoot, DEFAULT_BRANCH_WINDOW,
};
pub use sweep::{
    eps_sweep, stability_map, sweep_tau_c, tau_sweep, write_root_csv, write_tau_c_csv, EpsPoint,
    StabilityMap, TauCPoint, TauPoint,
};

/// Critical delay of a consensus-stable spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayMargin {
    pub tau_c: f64,
    /// Index into the sorted spectrum of the eigenvalue that crosses first.
    pub limiting_eigenvalue_index: usize,
    /// `omega = |lambda_i|`, the crossing frequency.
    pub crossing_frequency: f64,
}

/// `tau_c = min_i (theta_i - pi/2) / R_i` over the non-null eigenvalues,
/// with `theta_i = |arg lambda_i|` folded into the upper half-plane.
pub fn tau_critical(spec: &Spectrum) -> Result<DelayMargin> {
    if spec.null_count() != 1 {
        return Err(Error::PreconditionViolated(format!(
            "expected exactly one null eigenvalue, found {}",
            spec.null_count()
        )));
    }
    let mut best: Option<DelayMargin> = None;
    for (index, lambda) in spec.non_null() {
        if lambda.re >= 0.0 {
            return Err(Error::PreconditionViolated(format!(
                "eigenvalue {lambda} is not in the open left half-plane"
            )));
        }
        let radius = lambda.norm();
        let theta = lambda.arg().abs();
        let tau = (theta - FRAC_PI_2) / radius;
        if best.is_none_or(|b| tau < b.tau_c) {
            best = Some(DelayMargin {
                tau_c: tau,
                limiting_eigenvalue_index: index,
                crossing_frequency: radius,
            });
        }
    }
    best.ok_or_else(|| Error::PreconditionViolated("spectrum has no non-null eigenvalue".into()))
}

/// Closed-form conservative delay bound computed from `M(0)`:
/// `(1 / (2 delta_bar)) atan(|Re lambda_3(0)| / delta_bar)`, where
/// `lambda_3(0)` is the rightmost non-null eigenvalue of `M(0)`.
pub fn tau_tilde_bound(g: &DirectedGraph) -> Result<f64> {
    g.require_strongly_connected()?;
    let delta_bar = g.degrees().delta_bar as f64;
    let (_, lambda3) = lambda3_at_zero(g)?;
    Ok((lambda3.re.abs() / delta_bar).atan() / (2.0 * delta_bar))
}

/// Rightmost non-null eigenvalue of `M(0)` with its spectrum index.
pub fn lambda3_at_zero(g: &DirectedGraph) -> Result<(usize, Complex64)> {
    let spec = AugmentedSystem::new(g, 0.0)?.spectrum(DEFAULT_NULL_TOLERANCE)?;
    spec.rightmost_non_null()
        .ok_or_else(|| Error::PreconditionViolated("M(0) has no non-null eigenvalue".into()))
}

/// Zero crossing of `Re(rightmost_root(spec, tau))` on `[lo, hi]` by
/// bisection, to relative width `rel_tol`.
pub fn bisect_crossing(
    spec: &Spectrum,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    branch_window: u32,
) -> Result<f64> {
    let re = |tau: f64| rightmost_root(spec, tau, branch_window).map(|r| r.root.re);
    let (f_lo, f_hi) = (re(lo)?, re(hi)?);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "no sign change on [{lo}, {hi}]: {f_lo:e} .. {f_hi:e}"
        )));
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if re(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
