//! Solvers for the two graph design problems, the consensus convergence
//! factor `μ(A)`, and the consensus iteration itself.
//!
//! Both problems minimise a convex objective over a compact set of symmetric
//! row-stochastic matrices, optionally intersected with the spectral cap
//! `A − (1/N)·11ᵀ ⪯ (1 − ε)I` that forces connectedness.
//!
//! * Consensus design (nonsmooth `μ`) uses projected subgradient steps
//!   `α₀/√t` and returns the best iterate. With the cap it switches to a
//!   splitting method; see [`consensus_design`].
//! * Graph learning (linear objective) uses a projected-gradient splitting
//!   that handles the cap as a separate block; see [`spg_learn`].

mod consensus;
mod mu;
mod simulate;
mod spg;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{connectedness_margin, AdjacencyMatrix};
use crate::linalg::{self, averaging_matrix, symmetrize_in_place};
use crate::projections::SupportMask;

pub use consensus::{consensus_design, ConsensusProblem};
pub use mu::{mu_subgradient, mu_value, split_threshold, MuBranch, MuSubgradient};
pub use simulate::simulate_consensus;
pub use spg::{smoothness_gradient, smoothness_objective, spg_learn, SpgProblem};

/// Margin used by the experiments; `cap = 1 − ε`.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Initial step: `α₀` of the subgradient schedule `α₀/√t` or the initial
    /// penalty `ρ₀` of a splitting solver. `None` picks the problem's
    /// default.
    pub step0: Option<f64>,
    /// Subgradient solver: stop once the best objective improves by less than
    /// `rel_tol · max(1, |best|)` over `patience` consecutive iterations.
    pub rel_tol: f64,
    pub patience: usize,
    /// Splitting solvers (learning, connected consensus): stop once the primal
    /// and dual residuals are both below this.
    pub splitting_tol: f64,
    /// Largest constraint violation accepted in the returned solution.
    pub feasibility_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            step0: None,
            rel_tol: 1e-8,
            patience: 100,
            splitting_tol: 1e-8,
            feasibility_tol: 1e-6,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if let Some(s) = self.step0 {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "step0 must be positive, got {s}"
                )));
            }
        }
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("splitting_tol", self.splitting_tol),
            ("feasibility_tol", self.feasibility_tol),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Worst violation of each constraint, measured entrywise (or, for the
/// spectral cap, as `λ_max(A − (1/N)·11ᵀ) − cap` clipped at zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub nonnegativity: f64,
    pub row_sum: f64,
    pub diagonal: Option<f64>,
    pub support: Option<f64>,
    pub spectral: Option<f64>,
}

impl Feasibility {
    pub fn max(&self) -> f64 {
        [
            Some(self.nonnegativity),
            Some(self.row_sum),
            self.diagonal,
            self.support,
            self.spectral,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }

    fn measure(
        a: &Array2<f64>,
        zero_diagonal: bool,
        support: Option<&SupportMask>,
        cap: Option<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        let nonnegativity = a.iter().fold(0.0_f64, |acc, &x| acc.max(-x));
        let row_sum = a
            .rows()
            .into_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        let diagonal =
            zero_diagonal.then(|| a.diag().iter().fold(0.0_f64, |acc, x| acc.max(x.abs())));
        let support = support.map(|mask| {
            a.indexed_iter()
                .filter(|((i, j), _)| !mask.allows(*i, *j))
                .fold(0.0_f64, |acc, (_, x)| acc.max(x.abs()))
        });
        let spectral = match cap {
            Some(cap) => {
                let vals = linalg::eigenvalues(&(a - &averaging_matrix(n)))?;
                Some((vals[n - 1] - cap).max(0.0))
            }
            None => None,
        };
        Ok(Self {
            nonnegativity,
            row_sum,
            diagonal,
            support,
            spectral,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveWarning {
    /// The data cannot distinguish between edges; any feasible point is optimal.
    DegenerateData,
    /// `μ(A) ≥ 1`: the consensus iteration on the design need not converge.
    ConsensusNotGuaranteed { mu: f64 },
    /// The stopping rule did not trigger before `max_iter`.
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub a: AdjacencyMatrix,
    /// Objective at `a`.
    pub objective: f64,
    /// Objective of every iterate, in order.
    pub objective_trace: Vec<f64>,
    pub feasibility: Feasibility,
    /// `λ_min(L + (1/N)·11ᵀ)` of the returned graph.
    pub margin: f64,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<SolveWarning>,
}

impl SolveReport {
    pub fn max_residual(&self) -> f64 {
        self.feasibility.max()
    }

    /// Running minimum of the objective trace.
    pub fn best_trace(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.objective_trace
            .iter()
            .map(|&f| {
                best = best.min(f);
                best
            })
            .collect()
    }
}

/// Output of the shared descent loop.
struct Descent {
    best: Array2<f64>,
    trace: Vec<f64>,
    iterations: usize,
    stopped: bool,
}

/// Projected (sub)gradient descent with steps `step0/√t` and best-iterate
/// tracking. `oracle` returns the objective and a (sub)gradient at a point.
fn projected_descent(
    start: &Array2<f64>,
    project: impl Fn(&Array2<f64>) -> Result<Array2<f64>>,
    opts: &SolverOptions,
    step0: f64,
    mut oracle: impl FnMut(&Array2<f64>) -> Result<(f64, Array2<f64>)>,
) -> Result<Descent> {
    let mut x = project(start)?;
    let mut best = x.clone();
    let mut best_f = f64::INFINITY;
    let mut best_hist = Vec::with_capacity(opts.max_iter.min(1 << 16));
    let mut trace = Vec::with_capacity(opts.max_iter.min(1 << 16));
    let mut stopped = false;
    let mut iterations = 0;

    for t in 1..=opts.max_iter {
        iterations = t;
        let (f, g) = oracle(&x)?;
        if !f.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "objective became non-finite at iteration {t}"
            )));
        }
        trace.push(f);
        if f < best_f {
            best_f = f;
            best.assign(&x);
        }
        best_hist.push(best_f);
        if t > opts.patience {
            let earlier = best_hist[t - 1 - opts.patience];
            if earlier - best_f <= opts.rel_tol * best_f.abs().max(1.0) {
                stopped = true;
                break;
            }
        }
        if t == opts.max_iter {
            break;
        }
        let alpha = step0 / (t as f64).sqrt();
        let mut y = g;
        y.mapv_inplace(|v| -alpha * v);
        y += &x;
        x = project(&y)?;
    }
    Ok(Descent {
        best,
        trace,
        iterations,
        stopped,
    })
}

/// Exact symmetry, nonnegativity, and exact zeros where the constraints
/// demand them. Removes the rounding noise the iterative solvers leave behind.
fn clean(mut a: Array2<f64>, zero_diagonal: bool, support: Option<&SupportMask>) -> Array2<f64> {
    symmetrize_in_place(&mut a);
    a.mapv_inplace(|x| x.max(0.0));
    if zero_diagonal {
        a.diag_mut().fill(0.0);
    }
    if let Some(mask) = support {
        for ((i, j), x) in a.indexed_iter_mut() {
            if !mask.allows(i, j) {
                *x = 0.0;
            }
        }
    }
    a
}

struct Finish<'a> {
    zero_diagonal: bool,
    support: Option<&'a SupportMask>,
    cap: Option<f64>,
}

fn finish(
    descent: Descent,
    finish: Finish<'_>,
    opts: &SolverOptions,
    objective: impl Fn(&Array2<f64>) -> Result<f64>,
    mut warnings: Vec<SolveWarning>,
) -> Result<SolveReport> {
    let a = clean(descent.best, finish.zero_diagonal, finish.support);
    let feasibility = Feasibility::measure(&a, finish.zero_diagonal, finish.support, finish.cap)?;
    let objective = objective(&a)?;
    let a = AdjacencyMatrix::new(a)?;
    let margin = connectedness_margin(&a)?;
    let feasible = feasibility.max() <= opts.feasibility_tol;
    if !descent.stopped {
        warnings.push(SolveWarning::IterationLimit);
    }
    let report = SolveReport {
        a,
        objective,
        objective_trace: descent.trace,
        feasibility,
        margin,
        iterations: descent.iterations,
        converged: descent.stopped && feasible,
        warnings,
    };
    if feasible {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}
