//! Undirected weighted graphs, their weighted Laplacian, and the spectral and
//! combinatorial connectedness tests.

use std::collections::VecDeque;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::{self, averaging_matrix, symmetrize_in_place};

/// Relative asymmetry tolerated (and averaged away) at construction.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Default relative eigenvalue threshold for counting null-space dimensions.
pub const DEFAULT_EIG_TOL: f64 = 1e-8;

/// Symmetric nonnegative weight matrix of an undirected graph. `A[k][l] > 0`
/// means nodes `k` and `l` share an edge of that strength.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    w: Array2<f64>,
}

impl AdjacencyMatrix {
    /// Validates and symmetrizes `w`. Small floating-point asymmetry is
    /// averaged out; anything above [`SYMMETRY_TOLERANCE`] (relative to the
    /// largest entry) is rejected, as is any negative entry.
    pub fn new(w: Array2<f64>) -> Result<Self> {
        let w = symmetrized(w)?;
        if let Some(((row, col), &value)) = w.indexed_iter().find(|(_, &x)| x < 0.0) {
            return Err(Error::NegativeWeight { row, col, value });
        }
        Ok(Self { w })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(Array2::zeros((n, n)))
    }

    /// Builds a graph from undirected weighted edges. Repeated edges overwrite.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut w = Array2::zeros((n, n));
        for &(i, j, x) in edges {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            w[[i, j]] = x;
            w[[j, i]] = x;
        }
        Self::new(w)
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.w
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[[i, j]]
    }

    /// Upper-triangular entries `(i, j, w)` with `i < j` and `w > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).filter_map(move |j| {
                let x = self.w[[i, j]];
                (x > 0.0).then_some((i, j, x))
            })
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.w.rows().into_iter().map(|r| r.sum()).collect()
    }
}

fn symmetrized(mut w: Array2<f64>) -> Result<Array2<f64>> {
    let (rows, cols) = w.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut scale: f64 = 0.0;
    for ((row, col), x) in w.indexed_iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
        scale = scale.max(x.abs());
    }
    let mut worst: f64 = 0.0;
    for i in 0..rows {
        for j in (i + 1)..rows {
            worst = worst.max((w[[i, j]] - w[[j, i]]).abs());
        }
    }
    if scale > 0.0 && worst / scale > SYMMETRY_TOLERANCE {
        return Err(Error::Asymmetric {
            asymmetry: worst / scale,
            tolerance: SYMMETRY_TOLERANCE,
        });
    }
    symmetrize_in_place(&mut w);
    Ok(w)
}

/// `L = diag(A·1) − A`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLaplacian {
    l: Array2<f64>,
}

impl WeightedLaplacian {
    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.l
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::eigenvalues(&self.l)
    }
}

pub fn weighted_laplacian(a: &AdjacencyMatrix) -> WeightedLaplacian {
    let w = a.matrix();
    let n = a.n();
    let mut l = w.mapv(|x| -x);
    for k in 0..n {
        // Self-loops cancel: the diagonal is the off-diagonal row sum.
        let degree: f64 = (0..n).filter(|&m| m != k).map(|m| w[[k, m]]).sum();
        l[[k, k]] = degree;
    }
    WeightedLaplacian { l }
}

/// `xᵀLx` evaluated as `Σ_{k<l} A_kl (x_k − x_l)²`.
pub fn laplacian_quadratic_form(a: &AdjacencyMatrix, x: &[f64]) -> Result<f64> {
    let n = a.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let w = a.matrix();
    let mut total = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let d = x[k] - x[l];
            total += w[[k, l]] * d * d;
        }
    }
    Ok(total)
}

/// Connected components of a graph, labelled `0..count` in order of each
/// component's lowest-numbered node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl ComponentLabeling {
    pub fn is_connected(&self) -> bool {
        self.count <= 1
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Breadth-first component labelling; `(k, l)` is an edge iff `A_kl > weight_tol`.
pub fn component_count_bfs(a: &AdjacencyMatrix, weight_tol: f64) -> ComponentLabeling {
    let n = a.n();
    let w = a.matrix();
    let mut labels = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = count;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            for l in 0..n {
                if labels[l] == usize::MAX && l != k && w[[k, l]] > weight_tol {
                    labels[l] = count;
                    queue.push_back(l);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling { labels, count }
}

/// Null-space dimension of `L`: the number of eigenvalues at or below
/// `eig_tol · max(1, λ_max(L))`.
pub fn spectral_component_count(a: &AdjacencyMatrix, eig_tol: f64) -> Result<usize> {
    if eig_tol.is_nan() || eig_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue tolerance must be positive, got {eig_tol}"
        )));
    }
    let values = weighted_laplacian(a).eigenvalues()?;
    let top = values.last().copied().unwrap_or(0.0);
    let threshold = eig_tol * top.max(1.0);
    Ok(values.iter().filter(|&&v| v <= threshold).count())
}

/// Second-smallest eigenvalue of `L`.
pub fn fiedler_value(a: &AdjacencyMatrix) -> Result<f64> {
    if a.n() < 2 {
        return Err(Error::Undefined("the Fiedler value"));
    }
    Ok(weighted_laplacian(a).eigenvalues()?[1])
}

/// `λ_min(L + (1/N)·11ᵀ)`: strictly positive exactly when the graph is
/// connected, and at least `ε` when `L + (1/N)·11ᵀ ⪰ εI` holds.
pub fn connectedness_margin(a: &AdjacencyMatrix) -> Result<f64> {
    let n = a.n();
    let shifted = weighted_laplacian(a).l + averaging_matrix(n);
    Ok(linalg::eigenvalues(&shifted)?[0])
}

pub fn is_connected(a: &AdjacencyMatrix, eig_tol: f64) -> Result<bool> {
    Ok(connectedness_margin(a)? > eig_tol)
}

/// Symmetric matrix of signs in {−1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    s: Array2<i8>,
}

impl SignPattern {
    pub fn new(s: Array2<i8>) -> Result<Self> {
        let (rows, cols) = s.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        for ((row, col), &value) in s.indexed_iter() {
            if !(-1..=1).contains(&value) {
                return Err(Error::InvalidSign { row, col, value });
            }
            if s[[col, row]] != value {
                return Err(Error::Asymmetric {
                    asymmetry: f64::INFINITY,
                    tolerance: 0.0,
                });
            }
        }
        Ok(Self { s })
    }

    /// Entrywise sign of a symmetric matrix, e.g. an empirical covariance.
    pub fn of(m: &Array2<f64>) -> Result<Self> {
        Self::new(m.mapv(|x| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        }))
    }

    pub fn matrix(&self) -> &Array2<i8> {
        &self.s
    }
}

/// `Ã_ij = s_ij · a_ij`, turning a signed matrix with known sign pattern into a
/// nonnegative adjacency matrix so the connectedness tests apply to it.
pub fn sign_pattern_transform(a: &Array2<f64>, s: &SignPattern) -> Result<AdjacencyMatrix> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if s.s.nrows() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: s.s.nrows(),
        });
    }
    let a = symmetrized(a.clone())?;
    let mut out = Array2::zeros((rows, rows));
    for ((i, j), &x) in a.indexed_iter() {
        let v = f64::from(s.s[[i, j]]) * x;
        if v < -1e-12 {
            return Err(Error::NegativeResult {
                row: i,
                col: j,
                value: v,
            });
        }
        out[[i, j]] = v.max(0.0);
    }
    AdjacencyMatrix::new(out)
}
