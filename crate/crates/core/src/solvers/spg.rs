use ndarray::Array2;

use super::{finish, Descent, Finish, SolveReport, SolveWarning, SolverOptions};
use crate::error::{Error, Result};
use crate::io::SignalMatrix;
use crate::linalg::{frobenius_distance, frobenius_inner, frobenius_norm};
use crate::projections::{proj_rowsum_affine, proj_spectral_cap, proj_sym_stochastic, SupportMask};

/// Smoothness-based graph learning from `M` samples of `N` node signals:
///
/// ```text
/// minimise   (1/M)·tr(X (I − A) Xᵀ)
/// subject to A = Aᵀ, A ≥ 0, diag(A) = 0, A·1 = 1
///            [I − A + (1/N)·11ᵀ ⪰ εI   when `connected`]
/// ```
#[derive(Debug, Clone)]
pub struct SpgProblem {
    pub x: SignalMatrix,
    pub epsilon: f64,
    pub connected: bool,
}

impl SpgProblem {
    pub fn new(x: SignalMatrix, connected: bool) -> Self {
        Self {
            x,
            epsilon: super::DEFAULT_EPSILON,
            connected,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// `(1/M)·tr(X (I − A) Xᵀ)`, computed directly from the samples.
pub fn smoothness_objective(x: &Array2<f64>, a: &Array2<f64>) -> f64 {
    let m = x.nrows() as f64;
    let laplacian = Array2::eye(a.nrows()) - a;
    let xl = x.dot(&laplacian);
    (&xl * x).sum() / m
}

/// Gradient of [`smoothness_objective`] in `A`: the constant `−(1/M)·XᵀX`.
pub fn smoothness_gradient(x: &Array2<f64>) -> Array2<f64> {
    x.t().dot(x) / -(x.nrows() as f64)
}

/// True when every off-diagonal entry of the sample Gram matrix is the same,
/// so the objective is constant on the feasible set.
fn is_degenerate(gram: &Array2<f64>) -> bool {
    let n = gram.nrows();
    let scale = gram.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            lo = lo.min(gram[[i, j]]);
            hi = hi.max(gram[[i, j]]);
        }
    }
    hi - lo <= 1e-12 * scale.max(f64::MIN_POSITIVE)
}

/// Solves the learning problem by ADMM on the split `A ∈ P`, `B ∈ S`,
/// `A = B`, where `P` holds the symmetric nonnegative zero-diagonal matrices
/// with unit row sums and `S` the unit-row-sum matrices under the spectral cap
/// (all of them without the cap). Both blocks have exact projections:
///
/// ```text
/// A ← Π_P(B − U + ρC)        (projected gradient step of length ρ)
/// B ← Π_S(A + U)
/// U ← U + A − B
/// ```
///
/// with `C = XᵀX/M`. Without the cap `B = A` and `U = 0` throughout, so the
/// scheme is plain projected gradient with step `ρ`. The step is rebalanced
/// every ten iterations so that the primal residual `‖A − B‖` and the dual
/// residual `‖B − B_prev‖` (in units of the initial step) stay within a
/// factor of ten of each other. Iteration stops when both are below
/// `opts.splitting_tol`; the returned matrix is the last `A`, cleaned.
pub fn spg_learn(p: &SpgProblem, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let x = p.x.values();
    let n = x.ncols();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "graph learning needs at least two nodes, got {n}"
        )));
    }
    if !(0.0..1.0).contains(&p.epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in [0, 1), got {}",
            p.epsilon
        )));
    }
    let cap = p.connected.then_some(1.0 - p.epsilon);
    let mask = SupportMask::new(Array2::from_shape_fn((n, n), |(i, j)| i != j))?;
    let project_s = |m: &Array2<f64>| -> Result<Array2<f64>> {
        let affine = proj_rowsum_affine(m);
        match cap {
            Some(cap) => proj_spectral_cap(&affine, cap),
            None => Ok(affine),
        }
    };

    // C = XᵀX/M; objective tr(C) − ⟨C, A⟩.
    let gram = -smoothness_gradient(x);
    let trace = gram.diag().sum();
    let objective = |a: &Array2<f64>| trace - frobenius_inner(&gram, a);
    let mut warnings = Vec::new();
    if is_degenerate(&gram) {
        warnings.push(SolveWarning::DegenerateData);
    }
    let rho0 = opts
        .step0
        .unwrap_or_else(|| (2.0 * n as f64).sqrt() / (1.0 + frobenius_norm(&gram)));

    let mut b = (Array2::<f64>::ones((n, n)) - Array2::<f64>::eye(n)) / (n - 1) as f64;
    let mut a = b.clone();
    let mut u = Array2::<f64>::zeros((n, n));
    let mut rho = rho0;
    let mut trace_f = Vec::new();
    let mut stopped = false;
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        iterations = k;
        let mut y = &b - &u;
        y.scaled_add(rho, &gram);
        a = proj_sym_stochastic(&y, &mask)?;
        let z = &a + &u;
        let b_next = project_s(&z)?;
        let primal = frobenius_distance(&a, &b_next);
        let dual = frobenius_distance(&b_next, &b) * rho0 / rho;
        u = z - &b_next;
        b = b_next;
        let f = objective(&a);
        if !f.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "objective became non-finite at iteration {k}"
            )));
        }
        trace_f.push(f);
        if primal <= opts.splitting_tol && dual <= opts.splitting_tol {
            stopped = true;
            break;
        }
        if k % 10 == 0 {
            if primal > 10.0 * dual {
                rho *= 0.5;
                u *= 0.5;
            } else if dual > 10.0 * primal {
                rho *= 2.0;
                u *= 2.0;
            }
        }
    }

    finish(
        Descent {
            best: a,
            trace: trace_f,
            iterations,
            stopped,
        },
        Finish {
            zero_diagonal: true,
            support: None,
            cap,
        },
        opts,
        |a| Ok(smoothness_objective(x, a)),
        warnings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::component_count_bfs;
    use crate::io::truncate_edges;
    use crate::linalg::frobenius_distance;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn signals(x: Array2<f64>) -> SignalMatrix {
        SignalMatrix::new(x, None).unwrap()
    }

    #[test]
    fn two_nodes_single_feasible_point() {
        let x = signals(array![[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]]);
        for connected in [false, true] {
            let r = spg_learn(
                &SpgProblem::new(x.clone(), connected),
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(frobenius_distance(r.a.matrix(), &array![[0.0, 1.0], [1.0, 0.0]]) < 1e-6);
        }
    }

    #[test]
    fn three_nodes_single_feasible_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = signals(Array2::from_shape_fn((5, 3), |_| {
            rng.random_range(-1.0..1.0)
        }));
        let expected = (Array2::<f64>::ones((3, 3)) - Array2::<f64>::eye(3)) * 0.5;
        let r = spg_learn(&SpgProblem::new(x, true), &SolverOptions::default()).unwrap();
        assert!(frobenius_distance(r.a.matrix(), &expected) < 1e-6);
    }

    /// Two tight pairs of identical signals, far apart from each other.
    fn paired_signals() -> SignalMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut x = Array2::zeros((20, 4));
        for t in 0..20 {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0) + 5.0 * (t as f64 * 0.7).sin();
            x[[t, 0]] = a;
            x[[t, 1]] = a;
            x[[t, 2]] = b;
            x[[t, 3]] = b;
        }
        signals(x)
    }

    #[test]
    fn paired_signals_split_without_constraint() {
        let r = spg_learn(
            &SpgProblem::new(paired_signals(), false),
            &SolverOptions::default(),
        )
        .unwrap();
        let t = truncate_edges(&r.a, 0.001);
        assert_eq!(component_count_bfs(&t, 0.0).count, 2);
        assert!(r.a.weight(0, 1) > 0.99 && r.a.weight(2, 3) > 0.99);
    }

    #[test]
    fn paired_signals_stay_connected_with_constraint() {
        let r = spg_learn(
            &SpgProblem::new(paired_signals(), true),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r.margin >= 0.01 - 1e-6, "margin {}", r.margin);
        assert!(r.max_residual() <= 1e-6);
    }

    #[test]
    fn degenerate_data_is_flagged() {
        let x = signals(Array2::from_shape_fn((4, 3), |(t, _)| t as f64));
        let r = spg_learn(&SpgProblem::new(x, false), &SolverOptions::default()).unwrap();
        assert!(r.warnings.contains(&SolveWarning::DegenerateData));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let (m, n) = (rng.random_range(1..8), rng.random_range(2..7));
            let x = Array2::from_shape_fn((m, n), |_| rng.random_range(-2.0..2.0));
            let a = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
            let d = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
            let h = 1e-5;
            let fd = (smoothness_objective(&x, &(&a + &(&d * h)))
                - smoothness_objective(&x, &(&a - &(&d * h))))
                / (2.0 * h);
            let analytic = frobenius_inner(&smoothness_gradient(&x), &d);
            assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0));
        }
    }
}
