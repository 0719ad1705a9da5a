//! The augmented `2n x 2n` state matrix and its spectral properties.
//!
//! The state is `y = [x; z]` with `x` the agent values and `z` the surplus
//! (storage) variables. Without delay the network evolves as `y' = M(eps) y`
//! with
//!
//! ```text
//!            [ -L_in          eps I       ]
//! M(eps) =   [  L_in   -L_out - eps I     ]
//! ```
//!
//! Every column of `M(eps)` sums to zero, so `1'x + 1'z` is invariant.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::linalg;

/// Absolute modulus below which an eigenvalue counts as null.
pub const DEFAULT_NULL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    graph: DirectedGraph,
    epsilon: f64,
    m: DMatrix<f64>,
}

impl AugmentedSystem {
    pub fn new(graph: &DirectedGraph, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be a finite non-negative number, got {epsilon}"
            )));
        }
        let n = graph.node_count();
        let lap = graph.laplacians();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&(-&lap.l_in));
        m.view_mut((n, 0), (n, n)).copy_from(&lap.l_in);
        m.view_mut((n, n), (n, n)).copy_from(&(-&lap.l_out));
        for i in 0..n {
            m[(i, n + i)] = epsilon;
            m[(n + i, n + i)] -= epsilon;
        }
        Ok(Self {
            graph: graph.clone(),
            epsilon,
            m,
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Number of agents `n`; the matrix is `2n x 2n`.
    pub fn agents(&self) -> usize {
        self.graph.node_count()
    }

    pub fn spectrum(&self, null_tolerance: f64) -> Result<Spectrum> {
        Ok(Spectrum::from_eigenvalues(
            linalg::eigenvalues(&self.m)?,
            null_tolerance,
        ))
    }

    /// Largest `|[1' 1'] M|` entry; zero up to rounding by construction.
    pub fn conservation_defect(&self) -> f64 {
        self.m
            .column_iter()
            .map(|c| c.sum().abs())
            .fold(0.0, f64::max)
    }
}

/// `dM/d(eps) = [[0, I], [0, -I]]`, independent of the graph and of `eps`.
pub fn epsilon_derivative(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        d[(i, n + i)] = 1.0;
        d[(n + i, n + i)] = -1.0;
    }
    d
}

/// Eigenvalues sorted by descending real part, ties by descending imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    null_tolerance: f64,
    null_count: usize,
}

fn descending(a: &Complex64, b: &Complex64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, null_tolerance: f64) -> Self {
        eigenvalues.sort_by(descending);
        let null_count = eigenvalues
            .iter()
            .filter(|z| z.norm() <= null_tolerance)
            .count();
        Self {
            eigenvalues,
            null_tolerance,
            null_count,
        }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn null_tolerance(&self) -> f64 {
        self.null_tolerance
    }

    pub fn null_count(&self) -> usize {
        self.null_count
    }

    pub fn is_null(&self, index: usize) -> bool {
        self.eigenvalues[index].norm() <= self.null_tolerance
    }

    /// `(index, eigenvalue)` for every non-null eigenvalue, in sorted order.
    pub fn non_null(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, z)| z.norm() > self.null_tolerance)
    }

    /// The rightmost non-null eigenvalue (`lambda_R`, or `lambda_3` for `M(0)`).
    pub fn rightmost_non_null(&self) -> Option<(usize, Complex64)> {
        self.non_null().next()
    }

    /// Exactly one null eigenvalue and every other one strictly in the left
    /// half-plane (real part below `-null_tolerance`).
    pub fn is_consensus_stable(&self) -> bool {
        self.null_count == 1 && self.non_null().all(|(_, z)| z.re < -self.null_tolerance)
    }

    /// Every eigenvalue has a partner within `tol` of its conjugate.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let mut used = vec![false; self.eigenvalues.len()];
        for (i, z) in self.eigenvalues.iter().enumerate() {
            if used[i] {
                continue;
            }
            if z.im.abs() <= tol {
                used[i] = true;
                continue;
            }
            let partner = (0..self.eigenvalues.len())
                .filter(|&j| j != i && !used[j])
                .find(|&j| (self.eigenvalues[j] - z.conj()).norm() <= tol);
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return false,
            }
        }
        true
    }
}

/// Positive null eigenvectors of the two Laplacians, each with unit 1-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct NullEigenvectors {
    /// `nu' L_in = 0`
    pub nu_l_in: DVector<f64>,
    /// `L_out nu = 0`
    pub nu_r_out: DVector<f64>,
}

impl NullEigenvectors {
    pub fn compute(g: &DirectedGraph) -> Result<Self> {
        g.require_strongly_connected()?;
        let lap = g.laplacians();
        let nu_l_in = positive_null_vector(&lap.l_in.transpose(), "left null vector of L_in")?;
        let nu_r_out = positive_null_vector(&lap.l_out, "right null vector of L_out")?;
        Ok(Self { nu_l_in, nu_r_out })
    }

    /// `nu_l_in' nu_r_out`, strictly positive.
    pub fn inner_product(&self) -> f64 {
        self.nu_l_in.dot(&self.nu_r_out)
    }

    /// Right null vector `[0; nu_r_out]` of `M(0)`.
    pub fn r2(&self) -> DVector<f64> {
        let n = self.nu_r_out.len();
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(n, n).copy_from(&self.nu_r_out);
        v
    }

    /// Left null vector `[nu_l_in; 0]` of `M(0)`.
    pub fn l2(&self) -> DVector<f64> {
        let n = self.nu_l_in.len();
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&self.nu_l_in);
        v
    }
}

/// Solves `a v = 0, 1'v = 1` by replacing the last equation with the
/// normalization; the bordered matrix is non-singular whenever the null
/// space is one-dimensional and not orthogonal to `1`.
fn positive_null_vector(a: &DMatrix<f64>, what: &str) -> Result<DVector<f64>> {
    let n = a.nrows();
    let mut bordered = a.clone();
    bordered.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let v = bordered
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalFailure(format!("{what}: singular bordered system")))?;
    let residual = (a * &v).amax();
    if residual > 1e-9 {
        return Err(Error::NumericalFailure(format!(
            "{what}: residual {residual:e}"
        )));
    }
    if let Some(bad) = v.iter().find(|&&x| x.is_nan() || x <= 1e-12) {
        return Err(Error::NumericalFailure(format!(
            "{what}: non-positive entry {bad:e}"
        )));
    }
    let norm1 = v.sum();
    Ok(v / norm1)
}

/// First-order slope `d lambda_2 / d eps` at `eps = 0`.
///
/// With null vectors scaled so that the left/right pairs of `M(0)` are
/// biorthonormal, the slope is `-n nu_l' nu_r / ((1' nu_l)(1' nu_r))`;
/// under the unit 1-norm scaling used here that is `-n nu_l' nu_r`.
pub fn lambda2_slope(g: &DirectedGraph) -> Result<f64> {
    let nv = NullEigenvectors::compute(g)?;
    let n = g.node_count() as f64;
    Ok(-n * nv.inner_product() / (nv.nu_l_in.sum() * nv.nu_r_out.sum()))
}

/// Follows `lambda_2(eps)` from near zero up to `eps` by nearest-neighbour
/// matching over a geometric ladder of `steps` points.
pub fn track_lambda2(g: &DirectedGraph, eps: f64, steps: usize) -> Result<Complex64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let steps = steps.max(1);
    let start = eps / 2f64.powi(steps as i32);
    let eig = linalg::eigenvalues(AugmentedSystem::new(g, start)?.matrix())?;
    // smallest modulus is lambda_1 = 0, the next one is lambda_2
    let mut by_modulus = eig.clone();
    by_modulus.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut tracked = *by_modulus
        .get(1)
        .ok_or_else(|| Error::InvalidParameter("graph too small to track lambda_2".into()))?;
    for k in (0..steps).rev() {
        let e = eps / 2f64.powi(k as i32);
        let eig = linalg::eigenvalues(AugmentedSystem::new(g, e)?.matrix())?;
        tracked = eig
            .into_iter()
            .filter(|z| z.norm() > DEFAULT_NULL_TOLERANCE)
            .min_by(|a, b| (a - tracked).norm().total_cmp(&(b - tracked).norm()))
            .ok_or_else(|| Error::NumericalFailure("no non-null eigenvalue to track".into()))?;
    }
    Ok(tracked)
}

/// Largest grid value up to which every `M(eps)` is consensus-stable.
///
/// This is a grid estimate of the admissible range `(0, eps_bar]`, not a
/// certified supremum.
pub fn find_eps_bar(g: &DirectedGraph, eps_grid: &[f64], null_tolerance: f64) -> Result<f64> {
    g.require_strongly_connected()?;
    validate_grid(eps_grid, "epsilon grid")?;
    if eps_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter(
            "epsilon grid must be positive".into(),
        ));
    }
    let mut best = None;
    for &eps in eps_grid {
        let spec = AugmentedSystem::new(g, eps)?.spectrum(null_tolerance)?;
        if !spec.is_consensus_stable() {
            break;
        }
        best = Some(eps);
    }
    best.ok_or(Error::NoAdmissibleEpsilon(eps_grid[0]))
}

pub(crate) fn validate_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{what} has non-finite values"
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{what} is not strictly ascending"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> DirectedGraph {
        DirectedGraph::new(2, [(1, 2), (2, 1)]).unwrap()
    }

    fn cycle3() -> DirectedGraph {
        DirectedGraph::new(3, [(1, 2), (2, 3), (3, 1)]).unwrap()
    }

    #[test]
    fn block_structure_at_zero() {
        let sys = AugmentedSystem::new(&two_node(), 0.0).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            -1.,  1.,  0.,  0.,
             1., -1.,  0.,  0.,
             1., -1., -1.,  1.,
            -1.,  1.,  1., -1.,
        ]);
        assert_eq!(sys.matrix(), &expected);
    }

    #[test]
    fn unit_epsilon_difference_is_derivative() {
        let g = DirectedGraph::six_agent_example();
        let m1 = AugmentedSystem::new(&g, 1.0).unwrap();
        let m0 = AugmentedSystem::new(&g, 0.0).unwrap();
        assert_eq!(m1.matrix() - m0.matrix(), epsilon_derivative(6));
    }

    #[test]
    fn six_agent_columns_sum_to_zero() {
        let sys = AugmentedSystem::new(&DirectedGraph::six_agent_example(), 1.3).unwrap();
        assert_eq!(sys.matrix().nrows(), 12);
        assert!(sys.conservation_defect() <= 1e-12);
    }

    #[test]
    fn negative_epsilon_rejected() {
        assert!(matches!(
            AugmentedSystem::new(&two_node(), -0.1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(AugmentedSystem::new(&two_node(), f64::NAN).is_err());
    }

    #[test]
    fn two_node_spectrum_at_zero() {
        let spec = AugmentedSystem::new(&two_node(), 0.0)
            .unwrap()
            .spectrum(DEFAULT_NULL_TOLERANCE)
            .unwrap();
        assert_eq!(spec.null_count(), 2);
        let e = spec.eigenvalues();
        assert!(e[0].norm() < 1e-12 && e[1].norm() < 1e-12);
        assert!((e[2] + 2.0).norm() < 1e-7 && (e[3] + 2.0).norm() < 1e-7);
    }

    #[test]
    fn six_agent_null_space_facts() {
        let g = DirectedGraph::six_agent_example();
        let s0 = AugmentedSystem::new(&g, 0.0)
            .unwrap()
            .spectrum(DEFAULT_NULL_TOLERANCE)
            .unwrap();
        assert_eq!(s0.null_count(), 2);
        assert!(s0.non_null().all(|(_, z)| z.re < 0.0));
        for eps in [0.05, 0.5, 1.3] {
            let s = AugmentedSystem::new(&g, eps)
                .unwrap()
                .spectrum(DEFAULT_NULL_TOLERANCE)
                .unwrap();
            assert_eq!(s.null_count(), 1);
            assert!(s.is_consensus_stable());
        }
    }

    #[test]
    fn sorting_is_deterministic_with_conjugate_ties() {
        let s = Spectrum::from_eigenvalues(
            vec![
                Complex64::new(-1.0, -2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 2.0),
                Complex64::new(-3.0, 0.0),
            ],
            1e-9,
        );
        assert_eq!(
            s.eigenvalues(),
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 2.0),
                Complex64::new(-1.0, -2.0),
                Complex64::new(-3.0, 0.0)
            ]
        );
        assert_eq!(s.rightmost_non_null(), Some((1, Complex64::new(-1.0, 2.0))));
        assert!(s.is_conjugate_closed(1e-9));
        let lopsided = Spectrum::from_eigenvalues(vec![Complex64::new(-1.0, 2.0)], 1e-9);
        assert!(!lopsided.is_conjugate_closed(1e-9));
    }

    #[test]
    fn null_vectors_of_symmetric_and_balanced_graphs() {
        let nv = NullEigenvectors::compute(&two_node()).unwrap();
        assert!((nv.nu_l_in - DVector::from_element(2, 0.5)).amax() < 1e-14);
        assert!((nv.nu_r_out - DVector::from_element(2, 0.5)).amax() < 1e-14);
        let nv = NullEigenvectors::compute(&cycle3()).unwrap();
        assert!((&nv.nu_l_in - DVector::from_element(3, 1.0 / 3.0)).amax() < 1e-14);
        assert!((&nv.nu_r_out - DVector::from_element(3, 1.0 / 3.0)).amax() < 1e-14);
        assert!((nv.inner_product() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn null_vectors_of_six_agent_graph() {
        let g = DirectedGraph::six_agent_example();
        let nv = NullEigenvectors::compute(&g).unwrap();
        let lap = g.laplacians();
        assert!((nv.nu_l_in.transpose() * &lap.l_in).amax() <= 1e-9);
        assert!((&lap.l_out * &nv.nu_r_out).amax() <= 1e-9);
        assert!(nv
            .nu_l_in
            .iter()
            .chain(nv.nu_r_out.iter())
            .all(|&v| v > 0.0));
        assert!(nv.inner_product() > 0.0);
        // exact rational null vectors: nu_l_in = (8,15,10,9,12,15)/69
        let exact = DVector::from_vec(vec![8., 15., 10., 9., 12., 15.]) / 69.0;
        assert!((&nv.nu_l_in - exact).amax() < 1e-14);

        let m0 = AugmentedSystem::new(&g, 0.0).unwrap();
        assert!((m0.matrix() * nv.r2()).amax() < 1e-12);
        assert!((nv.l2().transpose() * m0.matrix()).amax() < 1e-12);
    }

    #[test]
    fn null_vectors_need_strong_connectivity() {
        let g = DirectedGraph::new(2, [(1, 2)]).unwrap();
        assert!(matches!(
            NullEigenvectors::compute(&g),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(lambda2_slope(&g).is_err());
    }

    #[test]
    fn slope_values() {
        // biorthonormal scaling gives -n nu_l'nu_r
        assert!((lambda2_slope(&two_node()).unwrap() + 1.0).abs() < 1e-14);
        assert!((lambda2_slope(&cycle3()).unwrap() + 1.0).abs() < 1e-14);
        assert!(lambda2_slope(&DirectedGraph::six_agent_example()).unwrap() < 0.0);
    }

    #[test]
    fn two_node_eps_bar() {
        let g = two_node();
        let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let eb = find_eps_bar(&g, &grid, DEFAULT_NULL_TOLERANCE).unwrap();
        assert_eq!(eb, 1.0);
    }

    #[test]
    fn eps_bar_grid_errors() {
        let g = DirectedGraph::six_agent_example();
        assert!(find_eps_bar(&g, &[], 1e-9).is_err());
        assert!(find_eps_bar(&g, &[0.2, 0.1], 1e-9).is_err());
        // a vanishing epsilon leaves lambda_2 inside the null tolerance
        assert_eq!(
            find_eps_bar(&g, &[1e-12, 1.0], 1e-9),
            Err(Error::NoAdmissibleEpsilon(1e-12))
        );
    }
}
