use num_complex::Complex64;
use serde::Serialize;

use super::lambert::lambert_w;
use crate::error::{Error, Result};
use crate::system::Spectrum;

/// Branches `-2..=2` of `W`; the rightmost root for an eigenvalue in the
/// closed left half-plane always lies on `k` in `{-1, 0, 1}`.
pub const DEFAULT_BRANCH_WINDOW: u32 = 2;

/// Roots closer than this in real part count as tied; ties go to the
/// larger imaginary part so conjugate pairs resolve deterministically.
const TIE_TOLERANCE: f64 = 1e-12;

/// A characteristic root `s` of `det(sI - M e^{-s tau})` with
/// `s e^{s tau} = lambda_i`, `s = W_k(tau lambda_i) / tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RightmostRoot {
    pub root: Complex64,
    /// Index into the sorted spectrum the root was generated from.
    pub source_eigenvalue_index: usize,
    /// Lambert W branch; zero for the delay-free case.
    pub branch_index: i32,
    /// `|s e^{s tau} - lambda_i|`
    pub residual: f64,
}

/// Rightmost non-null characteristic root at delay `tau > 0`.
pub fn rightmost_root(spec: &Spectrum, tau: f64, branch_window: u32) -> Result<RightmostRoot> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delay must be positive, got {tau}"
        )));
    }
    let window = branch_window as i32;
    let mut best: Option<RightmostRoot> = None;
    for (index, lambda) in spec.non_null() {
        for k in -window..=window {
            let s = lambert_w(lambda * tau, k)? / tau;
            let residual = (s * (s * tau).exp() - lambda).norm();
            let candidate = RightmostRoot {
                root: s,
                source_eigenvalue_index: index,
                branch_index: k,
                residual,
            };
            if best.is_none_or(|b| further_right(&candidate.root, &b.root)) {
                best = Some(candidate);
            }
        }
    }
    best.ok_or_else(|| Error::PreconditionViolated("spectrum has no non-null eigenvalue".into()))
}

/// Like [`rightmost_root`] but `tau = 0` returns the rightmost non-null
/// eigenvalue itself instead of evaluating `W(0)/0`.
pub fn rightmost_root_or_eigenvalue(
    spec: &Spectrum,
    tau: f64,
    branch_window: u32,
) -> Result<RightmostRoot> {
    if tau == 0.0 {
        let (index, lambda) = spec
            .non_null()
            .reduce(|a, b| if further_right(&b.1, &a.1) { b } else { a })
            .ok_or_else(|| {
                Error::PreconditionViolated("spectrum has no non-null eigenvalue".into())
            })?;
        return Ok(RightmostRoot {
            root: lambda,
            source_eigenvalue_index: index,
            branch_index: 0,
            residual: 0.0,
        });
    }
    rightmost_root(spec, tau, branch_window)
}

pub(crate) fn further_right(a: &Complex64, b: &Complex64) -> bool {
    if (a.re - b.re).abs() <= TIE_TOLERANCE {
        a.im > b.im
    } else {
        a.re > b.re
    }
}
