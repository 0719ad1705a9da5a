//! Surplus-based average consensus on strongly connected digraphs under a
//! uniform communication delay.
//!
//! Each agent carries its value `x_i` and a surplus `z_i`; the augmented
//! dynamics `y' = M(eps) y(t - tau)` preserve `1'x + 1'z`, so the agents
//! agree on the initial average even when the graph is unbalanced. The
//! crate builds `M(eps)`, analyses its spectrum, computes delay margins and
//! rightmost characteristic roots, and simulates the delayed network.

pub mod delay;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod sim;
pub mod system;

pub use error::{Error, Result};
pub use graph::DirectedGraph;
pub use num_complex::Complex64;
pub use system::{AugmentedSystem, Spectrum};
