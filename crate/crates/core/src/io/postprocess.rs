use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;

/// Zeroes every entry below `threshold`.
pub fn truncate_edges(a: &AdjacencyMatrix, threshold: f64) -> AdjacencyMatrix {
    let mut w = a.matrix().clone();
    w.mapv_inplace(|x| if x < threshold { 0.0 } else { x });
    AdjacencyMatrix::new(w).expect("truncation keeps a valid adjacency matrix")
}

/// Counts per bin over `[bin_edges[b], bin_edges[b + 1])`, the last bin closed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl WeightHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of bins with at least one entry.
    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// `bin_start,bin_end,count` rows under a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start,bin_end,count\n");
        for (b, count) in self.counts.iter().enumerate() {
            let (lo, hi) = (self.bin_edges[b], self.bin_edges[b + 1]);
            writeln!(
                s,
                "{},{},{count}",
                super::format_real(lo),
                super::format_real(hi)
            )
            .unwrap();
        }
        s
    }
}

fn histogram(values: &[f64], bins: usize) -> Result<WeightHistogram> {
    if bins == 0 {
        return Err(Error::InvalidArgument(
            "histogram needs at least one bin".into(),
        ));
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(WeightHistogram {
            bin_edges: vec![0.0, 0.0],
            counts: vec![values.len()],
        });
    }
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|b| {
            if b == bins {
                max
            } else {
                max * b as f64 / bins as f64
            }
        })
        .collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let b = ((v / max) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    Ok(WeightHistogram { bin_edges, counts })
}

fn upper_weights(a: &AdjacencyMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(a.weight(i, j));
        }
    }
    out
}

/// Histogram of all `N(N−1)/2` upper-triangular off-diagonal entries, zeros
/// included, with uniform bins over `[0, max]`. A graph without edges gets a
/// single degenerate bin.
pub fn weight_histogram(a: &AdjacencyMatrix, bins: usize) -> Result<WeightHistogram> {
    histogram(&upper_weights(a), bins)
}

/// Like [`weight_histogram`] but counting only the positive weights.
pub fn positive_weight_histogram(a: &AdjacencyMatrix, bins: usize) -> Result<WeightHistogram> {
    let weights: Vec<f64> = upper_weights(a).into_iter().filter(|&w| w > 0.0).collect();
    histogram(&weights, bins)
}
