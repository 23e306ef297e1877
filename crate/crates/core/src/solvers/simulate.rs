use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;

/// Iterates `x(t+1) = A·x(t)` and returns all `steps + 1` states as rows.
/// `A` must be row-stochastic (row sums within 1e-6 of one).
pub fn simulate_consensus(a: &AdjacencyMatrix, x0: &[f64], steps: usize) -> Result<Array2<f64>> {
    let n = a.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    if let Some((k, s)) = a
        .row_sums()
        .into_iter()
        .enumerate()
        .find(|(_, s)| (s - 1.0).abs() > 1e-6)
    {
        return Err(Error::InvalidArgument(format!(
            "consensus weights must have unit row sums; row {k} sums to {s}"
        )));
    }
    let mut out = Array2::zeros((steps + 1, n));
    let mut x = Array1::from(x0.to_vec());
    out.row_mut(0).assign(&x);
    for t in 1..=steps {
        x = a.matrix().dot(&x);
        out.row_mut(t).assign(&x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::averaging_matrix;

    #[test]
    fn averaging_matrix_converges_in_one_step() {
        let a = AdjacencyMatrix::new(averaging_matrix(4)).unwrap();
        let traj = simulate_consensus(&a, &[1.0, 2.0, 3.0, 6.0], 3).unwrap();
        for t in 1..=3 {
            for &v in traj.row(t) {
                assert!((v - 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_never_mixes() {
        let a = AdjacencyMatrix::new(Array2::eye(3)).unwrap();
        let traj = simulate_consensus(&a, &[1.0, -2.0, 0.5], 10).unwrap();
        for row in traj.rows() {
            assert_eq!(row.to_vec(), vec![1.0, -2.0, 0.5]);
        }
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let a = AdjacencyMatrix::new(Array2::eye(2)).unwrap();
        assert_eq!(simulate_consensus(&a, &[4.0, 5.0], 0).unwrap().nrows(), 1);
    }

    #[test]
    fn validates_inputs() {
        let a = AdjacencyMatrix::new(Array2::eye(2)).unwrap();
        assert!(simulate_consensus(&a, &[1.0], 2).is_err());
        let b = AdjacencyMatrix::new(Array2::ones((2, 2))).unwrap();
        assert!(simulate_consensus(&b, &[1.0, 2.0], 2).is_err());
    }
}
