//! Frobenius-norm projections onto the constraint sets of the graph problems
//! and Dykstra's method for their intersection.
//!
//! Every elementary set has a closed-form projection:
//!
//! * [`proj_box_sym`]: `A ≥ 0`, optionally `diag(A) = 0`
//! * [`proj_support`]: `A_kl = 0` outside an allowed edge set
//! * [`proj_rowsum_affine`]: `A = Aᵀ`, `A·1 = 1`
//! * [`proj_spectral_cap`]: `A − (1/N)·11ᵀ ⪯ cap·I`, by eigenvalue clipping
//!
//! [`proj_sym_stochastic`] projects exactly onto the intersection of the
//! first three (nonnegative, supported, unit row sums) by a Newton solve on
//! the row-sum multipliers.
//!
//! Under `A·1 = 1` the spectral cap with `cap = 1 − ε` is equivalent to
//! `L + (1/N)·11ᵀ ⪰ εI` for `L = I − A`.

mod dykstra;
mod stochastic;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use crate::linalg::{averaging_matrix, symmetrize_in_place, SymmetricEigen};

pub use dykstra::{
    dykstra_project, ProjectionReport, SetResidual, DEFAULT_MAX_CYCLES, DEFAULT_TOL,
};
pub use stochastic::proj_sym_stochastic;

/// Symmetric boolean matrix of entries allowed to be nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    allowed: Array2<bool>,
}

impl SupportMask {
    pub fn new(allowed: Array2<bool>) -> Result<Self> {
        let (rows, cols) = allowed.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        for ((i, j), &x) in allowed.indexed_iter() {
            if allowed[[j, i]] != x {
                return Err(Error::InvalidArgument(format!(
                    "support mask is not symmetric at ({i}, {j})"
                )));
            }
        }
        Ok(Self { allowed })
    }

    pub fn full(n: usize) -> Self {
        Self {
            allowed: Array2::from_elem((n, n), true),
        }
    }

    /// Edges of `a` (positive off-diagonal weights), plus the diagonal when
    /// `allow_diagonal` is set.
    pub fn from_graph(a: &AdjacencyMatrix, allow_diagonal: bool) -> Self {
        let n = a.n();
        let allowed = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                allow_diagonal
            } else {
                a.weight(i, j) > 0.0
            }
        });
        Self { allowed }
    }

    pub fn n(&self) -> usize {
        self.allowed.nrows()
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.allowed[[i, j]]
    }

    pub fn matrix(&self) -> &Array2<bool> {
        &self.allowed
    }

    /// Off-diagonal allowed entries as a unit-weight graph.
    pub fn graph(&self) -> AdjacencyMatrix {
        let n = self.n();
        let w = Array2::from_shape_fn((n, n), |(i, j)| {
            if i != j && self.allowed[[i, j]] {
                1.0
            } else {
                0.0
            }
        });
        AdjacencyMatrix::new(w).expect("mask is symmetric and nonnegative")
    }
}

/// One elementary constraint set.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    /// `A ≥ 0` entrywise, with `diag(A) = 0` when `zero_diagonal`.
    BoxSym { zero_diagonal: bool },
    /// Entries outside the mask are zero.
    Support(SupportMask),
    /// Symmetric with unit row sums.
    RowSumAffine,
    /// `A − (1/N)·11ᵀ ⪯ cap·I`, i.e. `ε = 1 − cap`.
    SpectralCap { cap: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetKind {
    BoxSym,
    Support,
    RowSumAffine,
    SpectralCap,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::BoxSym => "box",
            SetKind::Support => "support",
            SetKind::RowSumAffine => "row-sum",
            SetKind::SpectralCap => "spectral-cap",
        }
    }
}

impl ConstraintSet {
    pub fn kind(&self) -> SetKind {
        match self {
            ConstraintSet::BoxSym { .. } => SetKind::BoxSym,
            ConstraintSet::Support(_) => SetKind::Support,
            ConstraintSet::RowSumAffine => SetKind::RowSumAffine,
            ConstraintSet::SpectralCap { .. } => SetKind::SpectralCap,
        }
    }

    pub fn project(&self, m: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            ConstraintSet::BoxSym { zero_diagonal } => Ok(proj_box_sym(m, *zero_diagonal)),
            ConstraintSet::Support(mask) => proj_support(m, mask),
            ConstraintSet::RowSumAffine => Ok(proj_rowsum_affine(m)),
            ConstraintSet::SpectralCap { cap } => proj_spectral_cap(m, *cap),
        }
    }

    /// Frobenius distance from `m` to the set.
    pub fn distance(&self, m: &Array2<f64>) -> Result<f64> {
        let n = m.nrows();
        Ok(match self {
            ConstraintSet::BoxSym { zero_diagonal } => {
                let mut sq = 0.0;
                for ((i, j), &x) in m.indexed_iter() {
                    if (i == j && *zero_diagonal) || x < 0.0 {
                        sq += x * x;
                    }
                }
                sq.sqrt()
            }
            ConstraintSet::Support(mask) => {
                check_dim(n, mask.n())?;
                m.indexed_iter()
                    .filter(|((i, j), _)| !mask.allows(*i, *j))
                    .map(|(_, x)| x * x)
                    .sum::<f64>()
                    .sqrt()
            }
            ConstraintSet::RowSumAffine => {
                let u = rowsum_dual(m);
                let total: f64 = u.iter().sum();
                let sq =
                    2.0 * n as f64 * u.iter().map(|x| x * x).sum::<f64>() + 2.0 * total * total;
                sq.max(0.0).sqrt()
            }
            ConstraintSet::SpectralCap { cap } => {
                let eig = crate::linalg::eigenvalues(&(m - &averaging_matrix(n)))?;
                eig.iter()
                    .map(|&l| (l - cap).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
        })
    }
}

/// Declarative feasible set: at most one set of each kind, always visited in
/// the order box → support → row-sum → spectral cap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSpec {
    sets: Vec<ConstraintSet>,
}

impl ConstraintSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, set: ConstraintSet) -> Result<Self> {
        self.push(set)?;
        Ok(self)
    }

    pub fn push(&mut self, set: ConstraintSet) -> Result<()> {
        if let ConstraintSet::SpectralCap { cap } = set {
            if !(cap > 0.0 && cap <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "spectral cap must lie in (0, 1], got {cap}"
                )));
            }
        }
        let kind = set.kind();
        if self.sets.iter().any(|s| s.kind() == kind) {
            return Err(Error::InvalidArgument(format!(
                "duplicate {} constraint",
                kind.name()
            )));
        }
        let at = self.sets.partition_point(|s| s.kind() < kind);
        self.sets.insert(at, set);
        Ok(())
    }

    pub fn sets(&self) -> &[ConstraintSet] {
        &self.sets
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, kind: SetKind) -> Option<&ConstraintSet> {
        self.sets.iter().find(|s| s.kind() == kind)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Entrywise `max(m, 0)`, zeroing the diagonal when asked.
pub fn proj_box_sym(m: &Array2<f64>, zero_diagonal: bool) -> Array2<f64> {
    let mut out = m.mapv(|x| x.max(0.0));
    if zero_diagonal {
        out.diag_mut().fill(0.0);
    }
    out
}

/// Zeroes every entry the mask does not allow.
pub fn proj_support(m: &Array2<f64>, mask: &SupportMask) -> Result<Array2<f64>> {
    check_dim(m.nrows(), mask.n())?;
    let mut out = m.clone();
    for ((i, j), x) in out.indexed_iter_mut() {
        if !mask.allows(i, j) {
            *x = 0.0;
        }
    }
    Ok(out)
}

/// Dual vector `u` of the row-sum projection: the nearest symmetric matrix with
/// unit row sums is `M + u1ᵀ + 1uᵀ`. Stationarity plus `A·1 = 1` give
/// `N·u + (1ᵀu)·1 = 1 − M·1`, solved here in closed form.
fn rowsum_dual(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let nf = n as f64;
    let r: Vec<f64> = m.rows().into_iter().map(|row| 1.0 - row.sum()).collect();
    let s = r.iter().sum::<f64>() / (2.0 * nf);
    r.iter().map(|ri| (ri - s) / nf).collect()
}

/// Nearest (Frobenius) symmetric matrix with all row sums equal to one. The
/// input is symmetrized first.
pub fn proj_rowsum_affine(m: &Array2<f64>) -> Array2<f64> {
    let mut sym = m.clone();
    symmetrize_in_place(&mut sym);
    let u = rowsum_dual(&sym);
    let n = sym.nrows();
    for i in 0..n {
        for j in 0..n {
            sym[[i, j]] += u[i] + u[j];
        }
    }
    sym
}

/// Clips the spectrum of `m − (1/N)·11ᵀ` at `cap` and adds the averaging
/// matrix back. Inputs already inside the set are returned unchanged.
pub fn proj_spectral_cap(m: &Array2<f64>, cap: f64) -> Result<Array2<f64>> {
    if cap.is_nan() || cap <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "spectral cap must be positive, got {cap}"
        )));
    }
    let n = m.nrows();
    let mut centered = m - &averaging_matrix(n);
    symmetrize_in_place(&mut centered);
    let eig = SymmetricEigen::new(&centered)?;
    if eig.is_empty() || eig.max_value() <= cap {
        return Ok(m.clone());
    }
    // Subtract only the clipped part: Σ (λ − cap) v vᵀ over λ > cap.
    let mut out = m.clone();
    symmetrize_in_place(&mut out);
    for (j, &lam) in eig.values().iter().enumerate().rev() {
        if lam <= cap {
            break;
        }
        crate::linalg::add_outer(&mut out, eig.vector(j), cap - lam);
    }
    symmetrize_in_place(&mut out);
    Ok(out)
}
