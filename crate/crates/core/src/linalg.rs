//! Dense helpers shared by the spectral code.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// All eigenvalues of a real square matrix, in no particular order.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::InvalidParameter(format!(
            "eigenvalues of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "matrix has non-finite entries".into(),
        ));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig: Vec<Complex64> = a
        .eigenvalues()
        .map_err(|e| {
            Error::NumericalFailure(format!("eigensolver failed on a {n}x{n} matrix: {e:?}"))
        })?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure(
            "eigensolver returned non-finite values".into(),
        ));
    }
    Ok(eig)
}

/// Row-major CSV with 17 significant digits per entry.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", m[(i, j)]))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let mut e = eigenvalues(&m).unwrap();
        e.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn repeated_real_pairs_stay_finite() {
        let g = crate::DirectedGraph::new(
            5,
            [
                (1, 5),
                (2, 3),
                (2, 5),
                (3, 1),
                (3, 2),
                (4, 5),
                (5, 2),
                (5, 3),
                (5, 4),
            ],
        )
        .unwrap();
        let sys = crate::AugmentedSystem::new(&g, 0.5).unwrap();
        let e = eigenvalues(sys.matrix()).unwrap();
        let trace: f64 = e.iter().map(|z| z.re).sum();
        assert!((trace - sys.matrix().trace()).abs() < 1e-10);
        assert_eq!(e.iter().filter(|z| z.norm() < 1e-9).count(), 1);
    }

    #[test]
    fn complete_graph_multiplicities() {
        let edges = (1..=7).flat_map(|i| (1..=7).filter(move |&j| j != i).map(move |j| (i, j)));
        let g = crate::DirectedGraph::new(7, edges).unwrap();
        let e = eigenvalues(crate::AugmentedSystem::new(&g, 0.0).unwrap().matrix()).unwrap();
        assert_eq!(e.iter().filter(|z| z.norm() < 1e-9).count(), 2);
        assert_eq!(e.iter().filter(|z| (*z + 7.0).norm() < 1e-6).count(), 12);
    }

    #[test]
    fn rejects_nan() {
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(eigenvalues(&m), Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn csv_is_exact_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -1.0 / 3.0, 1e-300, 2.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<f64> = text
            .lines()
            .flat_map(|l| {
                l.split(',')
                    .map(|v| v.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(back, vec![0.1, -1.0 / 3.0, 1e-300, 2.0]);
    }
}
