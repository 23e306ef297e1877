//! Sparse graph learning and consensus weight design with a convex
//! connectedness constraint.
//!
//! A graph with nonnegative symmetric weights `A` is connected exactly when
//! `L + (1/N)·11ᵀ ≻ 0`, where `L = diag(A·1) − A` is its weighted Laplacian.
//! Requiring `L + (1/N)·11ᵀ ⪰ εI` is therefore a convex way to force
//! connectedness. This crate provides:
//!
//! * [`graph`]: adjacency matrices, Laplacians, and spectral/BFS connectivity
//! * [`projections`]: closed-form projections and Dykstra's method
//! * [`solvers`]: smoothness-based graph learning and consensus weight design
//! * [`io`]: synthetic data, CSV/JSON/DOT formats, truncation and histograms

pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod projections;
pub mod solvers;

pub use error::{Error, ParseError, Result};
pub use graph::{
    component_count_bfs, connectedness_margin, fiedler_value, is_connected,
    laplacian_quadratic_form, sign_pattern_transform, spectral_component_count, weighted_laplacian,
    AdjacencyMatrix, ComponentLabeling, SignPattern, WeightedLaplacian,
};
pub use io::{SignalMatrix, SynthConfig, WeightHistogram};
pub use projections::{
    dykstra_project, ConstraintSet, ConstraintSpec, ProjectionReport, SupportMask,
};
pub use solvers::{
    consensus_design, mu_subgradient, mu_value, simulate_consensus, spg_learn, split_threshold,
    ConsensusProblem, SolveReport, SolverOptions, SpgProblem,
};
