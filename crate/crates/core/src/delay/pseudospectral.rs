//! Chebyshev collocation of the infinitesimal generator of `y'(t) = M y(t - tau)`.
//!
//! The state of the delay system is a function on `[-tau, 0]`. Sampling it
//! at the `N + 1` Chebyshev–Gauss–Lobatto points turns the generator into a
//! `d (N + 1)` square matrix: the interior rows differentiate the sampled
//! function, the row at `theta = 0` applies `M` to the sample at `-tau`.
//! Its rightmost eigenvalues converge spectrally to the rightmost roots of
//! the characteristic quasi-polynomial. Nothing here goes through Lambert W.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::roots::further_right;
use crate::error::{Error, Result};
use crate::linalg;
use crate::system::{AugmentedSystem, DEFAULT_NULL_TOLERANCE};

pub const DEFAULT_ORDER: usize = 30;
pub const MIN_ORDER: usize = 10;

/// Chebyshev–Gauss–Lobatto points `cos(j pi / N)`, `j = 0..=N`, and the
/// matching differentiation matrix.
pub fn chebyshev_differentiation(order: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = order;
    let x: Vec<f64> = (0..=n)
        .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let c = |j: usize| -> f64 {
        let edge = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            edge
        } else {
            -edge
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
        // negative-sum trick: rows annihilate constants exactly
        let off: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -off;
    }
    (x, d)
}

/// Discretized generator for `y' = m y(t - tau)`.
pub fn generator_matrix(m: &DMatrix<f64>, tau: f64, order: usize) -> DMatrix<f64> {
    let dim = m.nrows();
    let (_, d) = chebyshev_differentiation(order);
    // theta = tau (x - 1) / 2, so d/dtheta = (2 / tau) d/dx
    let scale = 2.0 / tau;
    let size = dim * (order + 1);
    let mut a = DMatrix::zeros(size, size);
    a.view_mut((0, order * dim), (dim, dim)).copy_from(m);
    for i in 1..=order {
        for j in 0..=order {
            let v = scale * d[(i, j)];
            if v != 0.0 {
                for r in 0..dim {
                    a[(i * dim + r, j * dim + r)] = v;
                }
            }
        }
    }
    a
}

/// Rightmost non-null characteristic root of `y' = m y(t - tau)`.
///
/// The discretized generator keeps the null eigenvalues of `m` (constant
/// functions in its kernel); as many eigenvalues as `m` has null ones are
/// dropped, nearest to zero first.
pub fn rightmost_root_of_matrix(m: &DMatrix<f64>, tau: f64, order: usize) -> Result<Complex64> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delay must be positive, got {tau}"
        )));
    }
    if order < MIN_ORDER {
        return Err(Error::InvalidParameter(format!(
            "discretization order {order} below the minimum {MIN_ORDER}"
        )));
    }
    let nulls = linalg::eigenvalues(m)?
        .iter()
        .filter(|z| z.norm() <= DEFAULT_NULL_TOLERANCE)
        .count();
    let mut eig = linalg::eigenvalues(&generator_matrix(m, tau, order))?;
    eig.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    eig.drain(..nulls.min(eig.len()));
    eig.into_iter()
        .reduce(|a, b| if further_right(&b, &a) { b } else { a })
        .ok_or_else(|| Error::PreconditionViolated("no non-null root left".into()))
}

/// Oracle counterpart of `rightmost_root` for an augmented system.
pub fn rightmost_root_oracle(sys: &AugmentedSystem, tau: f64, order: usize) -> Result<Complex64> {
    rightmost_root_of_matrix(sys.matrix(), tau, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn differentiates_polynomials_exactly() {
        let (x, d) = chebyshev_differentiation(12);
        let f: Vec<f64> = x.iter().map(|&t| t.powi(5) - 2.0 * t * t).collect();
        for i in 0..x.len() {
            let df: f64 = (0..x.len()).map(|j| d[(i, j)] * f[j]).sum();
            let exact = 5.0 * x[i].powi(4) - 4.0 * x[i];
            assert!((df - exact).abs() < 1e-11, "row {i}: {df} vs {exact}");
        }
    }

    #[test]
    fn scalar_margin() {
        let m = DMatrix::from_element(1, 1, -1.0);
        let s = rightmost_root_of_matrix(&m, FRAC_PI_2, 24).unwrap();
        assert!(s.re.abs() <= 1e-6, "{s}");
        assert!((s.im - 1.0).abs() <= 1e-6, "{s}");
    }

    #[test]
    fn order_too_small() {
        let m = DMatrix::from_element(1, 1, -1.0);
        assert!(rightmost_root_of_matrix(&m, 1.0, 5).is_err());
        assert!(rightmost_root_of_matrix(&m, 0.0, 20).is_err());
    }
}
