use ndarray::Array2;

use super::{ConstraintSpec, SetKind};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, symmetrize_in_place};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_CYCLES: usize = 1000;

/// Window over which a stuck residual is declared a plateau.
const PLATEAU_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetResidual {
    pub kind: SetKind,
    /// Frobenius distance from the result to the set.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub result: Array2<f64>,
    pub cycles: usize,
    pub residuals: Vec<SetResidual>,
    pub converged: bool,
}

impl ProjectionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.distance)
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, kind: SetKind) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.kind == kind)
            .map(|r| r.distance)
    }
}

/// Dykstra's alternating projections with correction terms. Converges to the
/// Frobenius projection of `m` onto the intersection of the sets in `spec`.
///
/// A cycle visits every set once; iteration stops when neither the iterate
/// nor the correction terms move by more than `tol` over a cycle and the
/// result is within `tol` of every set. The
/// last set of a cycle is satisfied by construction, so only the others are
/// measured during iteration; the final report measures all of them.
pub fn dykstra_project(
    m: &Array2<f64>,
    spec: &ConstraintSpec,
    tol: f64,
    max_cycles: usize,
) -> Result<ProjectionReport> {
    if spec.is_empty() {
        return Err(Error::InvalidArgument("constraint spec is empty".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let max_cycles = max_cycles.max(1);
    let sets = spec.sets();
    let last = sets.len() - 1;

    let mut x = m.clone();
    symmetrize_in_place(&mut x);
    let mut corrections: Vec<Option<Array2<f64>>> = vec![None; sets.len()];
    let mut history: Vec<f64> = Vec::new();
    let mut cycles = 0;
    let mut converged = false;
    let mut plateau = false;

    while cycles < max_cycles {
        cycles += 1;
        let start = x.clone();
        let mut corr_change_sq = 0.0;
        for (set, corr) in sets.iter().zip(corrections.iter_mut()) {
            let y = match corr.as_ref() {
                Some(p) => &x + p,
                None => x.clone(),
            };
            let next = set.project(&y)?;
            let fresh = y - &next;
            corr_change_sq += match corr.as_ref() {
                Some(p) => frobenius_distance(&fresh, p).powi(2),
                None => fresh.iter().map(|v| v * v).sum(),
            };
            *corr = Some(fresh);
            x = next;
        }

        // The iterate can stand still while corrections still move, so both
        // must settle.
        let change = frobenius_distance(&x, &start).max(corr_change_sq.sqrt());
        let mut worst: f64 = 0.0;
        for set in &sets[..last] {
            worst = worst.max(set.distance(&x)?);
        }
        history.push(worst);
        if change <= tol && worst <= tol {
            converged = true;
            break;
        }
        // Only a residual that stops shrinking over a whole window counts as
        // a stall.
        if history.len() > PLATEAU_WINDOW {
            let before = history[history.len() - 1 - PLATEAU_WINDOW];
            if worst > 10.0 * tol && worst >= 0.99 * before {
                plateau = true;
                break;
            }
        }
    }

    let residuals = sets
        .iter()
        .map(|set| {
            Ok(SetResidual {
                kind: set.kind(),
                distance: set.distance(&x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ProjectionReport {
        result: x,
        cycles,
        residuals,
        converged,
    };
    if converged {
        return Ok(report);
    }

    if plateau {
        Err(Error::EmptyIntersectionSuspected(Box::new(report)))
    } else {
        Err(Error::ProjectionNotConverged(Box::new(report)))
    }
}

impl Error {
    /// The partial projection carried by a projection failure, if any.
    pub fn into_projection_report(self) -> std::result::Result<ProjectionReport, Error> {
        match self {
            Error::ProjectionNotConverged(r) | Error::EmptyIntersectionSuspected(r) => Ok(*r),
            other => Err(other),
        }
    }
}
