use ndarray::Array2;

use super::{finish, projected_descent, Descent, Finish, SolveReport, SolveWarning, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::{component_count_bfs, weighted_laplacian, AdjacencyMatrix};
use crate::linalg::{self, averaging_matrix, frobenius_distance};
use crate::projections::{proj_sym_stochastic, SupportMask};
use crate::solvers::mu::{mu_subgradient, mu_value, prox_capped_spectral_norm};

/// Sparse fastest-averaging weights on a fixed edge support:
///
/// ```text
/// minimise   μ(A) + η·tr(I − A)
/// subject to A = Aᵀ, A ≥ 0, A·1 = 1, A_kl = 0 for (k, l) ∉ E
///            [A − (1/N)·11ᵀ ⪯ (1 − ε)I   when `connected`]
/// ```
///
/// Self-weights `A_kk` are always free.
#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    pub support: SupportMask,
    pub eta: f64,
    pub connected: bool,
    pub epsilon: f64,
}

impl ConsensusProblem {
    /// Unconstrained design on the edges of `support`.
    pub fn new(support: &AdjacencyMatrix, eta: f64) -> Self {
        Self {
            support: SupportMask::from_graph(support, true),
            eta,
            connected: false,
            epsilon: super::DEFAULT_EPSILON,
        }
    }

    /// Adds the connectedness constraint with margin `epsilon`.
    pub fn connected(mut self, epsilon: f64) -> Self {
        self.connected = true;
        self.epsilon = epsilon;
        self
    }

    fn validate(&self) -> Result<SupportMask> {
        let n = self.support.n();
        if n < 2 {
            return Err(Error::Undefined("consensus design"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eta must be a nonnegative number, got {}",
                self.eta
            )));
        }
        if self.connected && !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        let mut allowed = self.support.matrix().clone();
        allowed.diag_mut().fill(true);
        let mask = SupportMask::new(allowed)?;
        if self.connected {
            let parts = component_count_bfs(&mask.graph(), 0.0).count;
            if parts > 1 {
                return Err(Error::Infeasible(format!(
                    "support graph has {parts} components; no connected design exists"
                )));
            }
        }
        Ok(mask)
    }
}

/// Maximum-degree weights `I − L/(d_max + 1)` on the support: a feasible
/// starting point for the unconstrained problem.
fn max_degree_weights(mask: &SupportMask) -> Array2<f64> {
    let graph = mask.graph();
    let l = weighted_laplacian(&graph);
    let d_max = l.matrix().diag().iter().copied().fold(0.0, f64::max);
    Array2::eye(mask.n()) - l.matrix() / (d_max + 1.0)
}

/// Solves the consensus design problem.
///
/// Without the cap this is projected subgradient descent with steps
/// `α₀/√t` (`α₀ = 1` by default) from the maximum-degree weights, projecting
/// exactly with [`proj_sym_stochastic`], and returns the best iterate.
/// Iteration stops once the best objective has improved by less than
/// `rel_tol · max(1, |best|)` over the last `patience` iterations.
///
/// With the cap, nested projections onto the capped set become slow where
/// the cap meets the polytope tangentially, so the problem is split instead.
/// On symmetric stochastic `A`, `μ(A) = ‖A − (1/N)·11ᵀ‖₂`, and ADMM on
/// `A ∈ P`, `B` free, `A = B` runs
///
/// ```text
/// A ← Π_P(B − U + (η/ρ)·I)
/// B ← J + prox_{‖·‖₂/ρ, λ_max ≤ 1−ε}(A + U − J)
/// U ← U + A − B
/// ```
///
/// with `J = (1/N)·11ᵀ` and the same residual balancing and stopping rule
/// (`splitting_tol`) as [`super::spg_learn`]; the last `A` is returned.
pub fn consensus_design(p: &ConsensusProblem, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let mask = p.validate()?;
    let n = mask.n();
    let cap = p.connected.then_some(1.0 - p.epsilon);

    let eta = p.eta;
    let nf = n as f64;
    let objective = |a: &Array2<f64>| Ok(mu_value(a)? + eta * (nf - a.diag().sum()));
    let descent = match cap {
        None => {
            let step0 = opts.step0.unwrap_or(1.0);
            projected_descent(
                &max_degree_weights(&mask),
                |y| proj_sym_stochastic(y, &mask),
                opts,
                step0,
                |x| {
                    let sg = mu_subgradient(x)?;
                    let f = sg.mu + eta * (nf - x.diag().sum());
                    let mut g = sg.g;
                    g.diag_mut().mapv_inplace(|v| v - eta);
                    Ok((f, g))
                },
            )?
        }
        Some(cap) => {
            let mut descent = split_design(&mask, eta, cap, opts, objective)?;
            if eta > 0.0 {
                restore_cap(&mut descent.best, &mask, cap, opts)?;
            }
            descent
        }
    };

    let mut report = finish(
        descent,
        Finish {
            zero_diagonal: false,
            support: Some(&mask),
            cap,
        },
        opts,
        objective,
        Vec::new(),
    )?;
    let mu = mu_value(report.a.matrix())?;
    if mu >= 1.0 - 1e-12 {
        report
            .warnings
            .push(SolveWarning::ConsensusNotGuaranteed { mu });
    }
    Ok(report)
}

/// `λ_max(A − (1/N)·11ᵀ)`.
fn cap_value(a: &Array2<f64>) -> Result<f64> {
    let vals = linalg::eigenvalues(&(a - &averaging_matrix(a.nrows())))?;
    Ok(vals[vals.len() - 1])
}

/// Moves a slightly cap-violating `a` (already in `P`) just far enough
/// towards the fastest-averaging design, which has the smallest possible
/// `λ_2`. `λ_max(· − J)` is convex, so the mix with weight
/// `θ = (λ(a) − cap)/(λ(a) − λ(ref))` meets the cap; the objective moves by at
/// most `θ` times the gap between the two designs.
fn restore_cap(
    a: &mut Array2<f64>,
    mask: &SupportMask,
    cap: f64,
    opts: &SolverOptions,
) -> Result<()> {
    let lam = cap_value(a)?;
    if lam <= cap {
        return Ok(());
    }
    let reference = split_design(mask, 0.0, cap, opts, mu_value)?.best;
    let lam_ref = cap_value(&reference)?;
    if lam_ref < cap {
        let theta = (lam - cap) / (lam - lam_ref);
        *a *= 1.0 - theta;
        a.scaled_add(theta, &reference);
    }
    Ok(())
}

/// Residual balancing stops after this many iterations so that ADMM keeps
/// its convergence guarantee.
const BALANCING_ITERATIONS: usize = 1000;

fn split_design(
    mask: &SupportMask,
    eta: f64,
    cap: f64,
    opts: &SolverOptions,
    objective: impl Fn(&Array2<f64>) -> Result<f64>,
) -> Result<Descent> {
    let n = mask.n();
    let j = averaging_matrix(n);
    let rho0 = opts.step0.unwrap_or(1.0);
    let mut b = proj_sym_stochastic(&max_degree_weights(mask), mask)?;
    let mut a = b.clone();
    let mut u = Array2::<f64>::zeros((n, n));
    let mut rho = rho0;
    let mut trace = Vec::new();
    let mut stopped = false;
    let mut iterations = 0;
    for k in 1..=opts.max_iter {
        iterations = k;
        let mut y = &b - &u;
        y.diag_mut().mapv_inplace(|v| v + eta / rho);
        a = proj_sym_stochastic(&y, mask)?;
        let z = &a + &u;
        let b_next = prox_capped_spectral_norm(&(&z - &j), 1.0 / rho, Some(cap))? + &j;
        let primal = frobenius_distance(&a, &b_next);
        let dual = frobenius_distance(&b_next, &b) * rho / rho0;
        u = z - &b_next;
        b = b_next;
        let f = objective(&a)?;
        if !f.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "objective became non-finite at iteration {k}"
            )));
        }
        trace.push(f);
        if primal <= opts.splitting_tol && dual <= opts.splitting_tol {
            stopped = true;
            break;
        }
        if k % 10 == 0 && k <= BALANCING_ITERATIONS {
            if primal > 10.0 * dual {
                rho *= 2.0;
                u *= 0.5;
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                u *= 2.0;
            }
        }
    }
    Ok(Descent {
        best: a,
        trace,
        iterations,
        stopped,
    })
}
