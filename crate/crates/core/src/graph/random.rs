//! Seeded random digraphs for tests and sweeps.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DirectedGraph;

/// Each ordered pair `(i, j)`, `i != j`, becomes an edge with probability
/// `p`; draws are repeated until the graph is strongly connected.
pub fn uniform_strongly_connected(n: usize, p: f64, seed: u64) -> DirectedGraph {
    assert!(n >= 2, "need at least two nodes");
    assert!(p > 0.0 && p <= 1.0, "edge probability must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j && rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = DirectedGraph::new(n, edges).expect("generated edges are in range");
        if g.is_strongly_connected() {
            return g;
        }
    }
}
