use ndarray::Array2;

use super::SupportMask;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, symmetrize_in_place};

/// Row-sum violation accepted by the Newton solve, per node and per unit of
/// input magnitude.
const ROW_TOL: f64 = 1e-13;
const MAX_NEWTON: usize = 200;
/// Accepted when rounding stalls the iteration above the target tolerance.
const FALLBACK_TOL: f64 = 1e-10;

/// Exact projection onto symmetric nonnegative matrices with unit row sums
/// and zeros outside `mask`. A disallowed diagonal forces `diag(A) = 0`.
///
/// The solution has the form `A_kl = max(M_kl + v_k + v_l, 0)` on allowed
/// entries. The dual vector `v` minimises the convex piecewise-quadratic
///
/// ```text
/// ψ(v) = Σ_{k<l} ½·max(M_kl + v_k + v_l, 0)² + Σ_k ¼·max(M_kk + 2v_k, 0)² − Σ_k v_k
/// ```
///
/// (sums over allowed entries), whose gradient is the row-sum residual. It is
/// found by a damped semismooth Newton method with Armijo backtracking.
pub fn proj_sym_stochastic(m: &Array2<f64>, mask: &SupportMask) -> Result<Array2<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if mask.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mask.n(),
        });
    }
    let mut sym = m.clone();
    symmetrize_in_place(&mut sym);
    let problem = Dual { m: &sym, mask };

    let scale = sym.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let tol = ROW_TOL * n as f64 * scale;
    let mut v = vec![0.0; n];
    let mut eval = problem.eval(&v);
    let mut residual = eval.residual();
    for _ in 0..MAX_NEWTON {
        if residual <= tol {
            break;
        }
        let d = problem.newton_direction(&v, &eval.grad, residual);
        let slope: f64 = eval.grad.iter().zip(&d).map(|(g, d)| g * d).sum();
        let mut t = 1.0;
        let mut moved = false;
        while t >= 1e-12 {
            let trial: Vec<f64> = v.iter().zip(&d).map(|(v, d)| v + t * d).collect();
            let next = problem.eval(&trial);
            // Near the solution ψ stops resolving the decrease, so a smaller
            // residual is accepted as progress too.
            if next.value <= eval.value + 1e-4 * t * slope || next.residual() < residual {
                v = trial;
                eval = next;
                residual = eval.residual();
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if residual <= tol.max(FALLBACK_TOL) {
        Ok(problem.primal(&v))
    } else {
        Err(Error::Infeasible(
            "no symmetric stochastic matrix fits the support".into(),
        ))
    }
}

struct Dual<'a> {
    m: &'a Array2<f64>,
    mask: &'a SupportMask,
}

struct DualEval {
    value: f64,
    grad: Vec<f64>,
}

impl DualEval {
    fn residual(&self) -> f64 {
        self.grad.iter().fold(0.0_f64, |acc, g| acc.max(g.abs()))
    }
}

impl Dual<'_> {
    fn eval(&self, v: &[f64]) -> DualEval {
        let n = v.len();
        let mut value = -v.iter().sum::<f64>();
        let mut grad = vec![-1.0; n];
        for k in 0..n {
            if self.mask.allows(k, k) {
                let z = (self.m[[k, k]] + 2.0 * v[k]).max(0.0);
                value += 0.25 * z * z;
                grad[k] += z;
            }
            for l in (k + 1)..n {
                if self.mask.allows(k, l) {
                    let z = (self.m[[k, l]] + v[k] + v[l]).max(0.0);
                    value += 0.5 * z * z;
                    grad[k] += z;
                    grad[l] += z;
                }
            }
        }
        DualEval { value, grad }
    }

    /// Solves `(J + δI)·d = −∇ψ` with `J` the generalized Hessian: the
    /// signless Laplacian of the active entries, diagonal ones counted twice.
    fn newton_direction(&self, v: &[f64], grad: &[f64], residual: f64) -> Vec<f64> {
        let n = v.len();
        let delta = residual.clamp(1e-12, 1e-2);
        let mut h = Array2::zeros((n, n));
        for k in 0..n {
            h[[k, k]] += delta;
            if self.mask.allows(k, k) && self.m[[k, k]] + 2.0 * v[k] > 0.0 {
                h[[k, k]] += 2.0;
            }
            for l in (k + 1)..n {
                if self.mask.allows(k, l) && self.m[[k, l]] + v[k] + v[l] > 0.0 {
                    h[[k, k]] += 1.0;
                    h[[l, l]] += 1.0;
                    h[[k, l]] += 1.0;
                    h[[l, k]] += 1.0;
                }
            }
        }
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        if cholesky_solve(&mut h, &mut d) {
            d
        } else {
            grad.iter().map(|g| -g).collect()
        }
    }

    fn primal(&self, v: &[f64]) -> Array2<f64> {
        let n = v.len();
        let mut a = Array2::zeros((n, n));
        for k in 0..n {
            for l in k..n {
                if self.mask.allows(k, l) {
                    let x = (self.m[[k, l]] + v[k] + v[l]).max(0.0);
                    a[[k, l]] = x;
                    a[[l, k]] = x;
                }
            }
        }
        a
    }
}
