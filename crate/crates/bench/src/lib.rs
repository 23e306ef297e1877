//! Deterministic inputs shared by the benchmarks.

use conngraph::{AdjacencyMatrix, SignalMatrix, SynthConfig};
use ndarray::Array2;

/// A dense symmetric matrix with entries in `[-1, 1]`, no RNG needed.
pub fn symmetric(n: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        (0.7 * a + 1.3 * b + 0.11 * a * b).sin()
    })
}

pub fn path(n: usize) -> AdjacencyMatrix {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    AdjacencyMatrix::from_edges(n, &edges).expect("path graph")
}

pub fn sinusoids(n: usize, m: usize) -> SignalMatrix {
    conngraph::io::gen_sinusoids(&SynthConfig::new(n, m, 0)).expect("valid config")
}
