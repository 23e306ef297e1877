use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, add_outer, symmetrize_in_place, SymmetricEigen};

/// Eigenvalues within this relative distance of the extreme one are treated
/// as a single (numerically multiple) eigenvalue.
const CLUSTER_TOL: f64 = 1e-9;

/// Ties `λ_2 = −λ_N` within this distance go to the `λ_2` branch.
const TIE_TOL: f64 = 1e-12;

/// `μ(A) = max{λ_2(A), −λ_N(A)}` with eigenvalues sorted in descending order.
pub fn mu_value(a: &Array2<f64>) -> Result<f64> {
    if a.nrows() < 2 {
        return Err(Error::Undefined("mu"));
    }
    let vals = linalg::eigenvalues(a)?;
    let n = vals.len();
    Ok(vals[n - 2].max(-vals[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuBranch {
    /// `μ` is attained by `λ_2`; the subgradient is `+vvᵀ`.
    SecondLargest,
    /// `μ` is attained by `−λ_N`; the subgradient is `−vvᵀ`.
    Smallest,
}

#[derive(Debug, Clone)]
pub struct MuSubgradient {
    pub mu: f64,
    pub branch: MuBranch,
    /// Dimension of the eigenspace averaged into `g`.
    pub multiplicity: usize,
    pub g: Array2<f64>,
}

/// Householder reflector `H = I − β·uuᵀ` swapping `1/√N` and `e₁`; columns
/// `1..N` of `H` are an orthonormal basis of `1⊥`.
fn ones_reflector(n: usize) -> (Array1<f64>, f64) {
    let mut u = Array1::from_elem(n, 1.0 / (n as f64).sqrt());
    u[0] -= 1.0;
    let norm_sq = u.dot(&u);
    (u, 2.0 / norm_sq)
}

/// A subgradient of `μ` on the affine set of symmetric matrices with unit row
/// sums.
///
/// `μ` is evaluated on `1⊥`: with `Q` an orthonormal basis of `1⊥`, the
/// eigenvalues of `QᵀAQ` are `λ_2(A) … λ_N(A)` whenever `A·1 = 1`. The
/// extreme eigenvalue attaining `μ` gives `G = ±vvᵀ`, `v = Qy`. When that
/// eigenvalue is multiple, `G` averages `vvᵀ` over its eigenspace, which is
/// still a subgradient and does not depend on the basis the eigensolver picks.
pub fn mu_subgradient(a: &Array2<f64>) -> Result<MuSubgradient> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if n < 2 {
        return Err(Error::Undefined("mu"));
    }
    let (u, beta) = ones_reflector(n);

    // H A H = A − β(u wᵀ + w uᵀ) + β² c uuᵀ with w = A u, c = uᵀ A u.
    let w = a.dot(&u);
    let c = u.dot(&w);
    let mut hah = a.clone();
    for i in 0..n {
        for j in 0..n {
            hah[[i, j]] += -beta * (u[i] * w[j] + w[i] * u[j]) + beta * beta * c * u[i] * u[j];
        }
    }
    let mut compressed = hah.slice(s![1.., 1..]).to_owned();
    symmetrize_in_place(&mut compressed);
    let eig = SymmetricEigen::new(&compressed)?;
    let vals = eig.values();
    let m = vals.len();
    let top = vals[m - 1];
    let bottom = vals[0];

    let (branch, mu, members): (MuBranch, f64, Vec<usize>) = if top >= -bottom - TIE_TOL {
        let delta = CLUSTER_TOL * top.abs().max(1.0);
        let idx = (0..m)
            .rev()
            .take_while(|&j| vals[j] >= top - delta)
            .collect();
        (MuBranch::SecondLargest, top, idx)
    } else {
        let delta = CLUSTER_TOL * bottom.abs().max(1.0);
        let idx = (0..m).take_while(|&j| vals[j] <= bottom + delta).collect();
        (MuBranch::Smallest, -bottom, idx)
    };
    let sign = match branch {
        MuBranch::SecondLargest => 1.0,
        MuBranch::Smallest => -1.0,
    };
    let weight = sign / members.len() as f64;

    let mut g = Array2::zeros((n, n));
    for &j in &members {
        // v = H [0; y]
        let mut v = Array1::zeros(n);
        v.slice_mut(s![1..]).assign(&eig.vector(j));
        let proj = u.dot(&v);
        v.scaled_add(-beta * proj, &u);
        add_outer(&mut g, v.view(), weight);
    }
    symmetrize_in_place(&mut g);
    Ok(MuSubgradient {
        mu,
        branch,
        multiplicity: members.len(),
        g,
    })
}

/// Level `s` of the clip `x_i = clamp(v_i, −s, min(s, cap))` that solves
///
/// ```text
/// minimise  t·‖x‖_∞ + ½‖x − v‖²  subject to  x ≤ cap
/// ```
///
/// The objective restricted to such clips is convex in `s` with nondecreasing
/// derivative `t − [s < cap]·Σ(v_i − s)₊ − Σ(−s − v_i)₊`; its smallest root in
/// `s ≥ 0` is found by bisection to machine precision.
fn capped_linf_prox_level(v: &[f64], t: f64, cap: f64) -> f64 {
    let slope = |s: f64| {
        let upper: f64 = if s < cap {
            v.iter().map(|&x| (x - s).max(0.0)).sum()
        } else {
            0.0
        };
        let lower: f64 = v.iter().map(|&x| (-s - x).max(0.0)).sum();
        t - upper - lower
    };
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `argmin_X t·‖X‖₂ + ½‖X − W‖²_F` over symmetric `X` with
/// `λ_max(X) ≤ cap` (no bound when `cap` is `None`), for symmetric `W`.
///
/// Both terms are spectral, so the minimiser shares the eigenvectors of `W`
/// and its eigenvalues solve the vector problem of
/// [`capped_linf_prox_level`]. Requires `cap ≥ 0`.
pub(crate) fn prox_capped_spectral_norm(
    w: &Array2<f64>,
    t: f64,
    cap: Option<f64>,
) -> Result<Array2<f64>> {
    let cap = cap.unwrap_or(f64::INFINITY);
    let mut w = w.clone();
    symmetrize_in_place(&mut w);
    let eig = SymmetricEigen::new(&w)?;
    let s = capped_linf_prox_level(&eig.values().to_vec(), t, cap);
    let top = s.min(cap);
    Ok(eig.reconstruct(|x| x.clamp(-s, top)))
}

/// `1/(n − k + 1)`: above this sparsity weight the unconstrained consensus
/// design splits into at least `k` connected components.
pub fn split_threshold(n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "component count k must satisfy 1 <= k <= n = {n}, got {k}"
        )));
    }
    Ok(1.0 / (n - k + 1) as f64)
}
