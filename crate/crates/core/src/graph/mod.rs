//! Directed communication graphs.
//!
//! An edge `(i, j)` means node `i` receives information from node `j`, so
//! `a_ij = 1`. Node indices are 1-based on every public surface; the
//! 0-based storage below never leaves this module.

mod io;
pub mod random;
mod scc;

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use io::{parse_adjacency_json, parse_edge_list, read_graph, to_edge_list};
pub use scc::strongly_connected_components;

/// Unweighted directed graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    // 0-based (receiver, sender) pairs
    edges: BTreeSet<(usize, usize)>,
}

/// In- and out-degrees of every node, plus the largest of all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub in_degrees: Vec<usize>,
    pub out_degrees: Vec<usize>,
    pub delta_bar: usize,
}

/// `l_in = D_in - A` (zero row sums) and `l_out = D_out - A` (zero column sums).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub l_in: DMatrix<f64>,
    pub l_out: DMatrix<f64>,
}

impl DirectedGraph {
    /// Builds a graph from 1-based `(receiver, sender)` pairs. Duplicates collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "graph needs at least one node".into(),
            ));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::InvalidEdge { i, j, n });
            }
            if i == j {
                return Err(Error::SelfLoopRejected(i));
            }
            set.insert((i - 1, j - 1));
        }
        Ok(Self { n, edges: set })
    }

    /// Builds a graph from a 0/1 adjacency matrix given row by row.
    pub fn from_adjacency(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "adjacency row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 => edges.push((i + 1, j + 1)),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "adjacency entry ({}, {}) is {other}, expected 0 or 1",
                            i + 1,
                            j + 1
                        )))
                    }
                }
            }
        }
        Self::new(n, edges)
    }

    /// The six-agent network used throughout the numerical study.
    pub fn six_agent_example() -> Self {
        let rows: Vec<Vec<u8>> = vec![
            vec![0, 1, 0, 1, 0, 1],
            vec![0, 0, 1, 0, 1, 0],
            vec![0, 1, 0, 1, 0, 1],
            vec![1, 0, 0, 0, 1, 0],
            vec![0, 1, 0, 0, 0, 1],
            vec![1, 0, 1, 0, 0, 0],
        ];
        Self::from_adjacency(&rows).expect("static adjacency is valid")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as 1-based `(receiver, sender)` pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(i, j)| (i + 1, j + 1))
    }

    pub(crate) fn edges_zero_based(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn adjacency(&self) -> DMatrix<u8> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1;
        }
        a
    }

    pub fn degrees(&self) -> DegreeProfile {
        let mut in_degrees = vec![0; self.n];
        let mut out_degrees = vec![0; self.n];
        for &(i, j) in &self.edges {
            in_degrees[i] += 1;
            out_degrees[j] += 1;
        }
        let delta_bar = in_degrees
            .iter()
            .chain(out_degrees.iter())
            .copied()
            .max()
            .unwrap_or(0);
        DegreeProfile {
            in_degrees,
            out_degrees,
            delta_bar,
        }
    }

    pub fn laplacians(&self) -> LaplacianPair {
        let deg = self.degrees();
        let a = self.adjacency().map(f64::from);
        let d_in = DMatrix::from_diagonal(
            &deg.in_degrees
                .iter()
                .map(|&d| d as f64)
                .collect::<Vec<_>>()
                .into(),
        );
        let d_out = DMatrix::from_diagonal(
            &deg.out_degrees
                .iter()
                .map(|&d| d as f64)
                .collect::<Vec<_>>()
                .into(),
        );
        LaplacianPair {
            l_in: d_in - &a,
            l_out: d_out - a,
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        strongly_connected_components(self).len() == 1
    }

    pub fn is_balanced(&self) -> bool {
        let deg = self.degrees();
        deg.in_degrees == deg.out_degrees
    }

    /// Fails with `PreconditionViolated` unless the graph is strongly connected.
    pub fn require_strongly_connected(&self) -> Result<()> {
        if self.is_strongly_connected() {
            Ok(())
        } else {
            Err(Error::PreconditionViolated(
                "graph is not strongly connected".into(),
            ))
        }
    }
}
