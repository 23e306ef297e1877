use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use conngraph::io::{
    export_graph, gen_sinusoids, import_edgelist, import_graph_json, positive_weight_histogram,
    read_timeseries_csv, truncate_edges, weight_histogram, write_timeseries_csv, GraphFormat,
    NamedGraph,
};
use conngraph::solvers::{Feasibility, SolveWarning};
use conngraph::{
    component_count_bfs, connectedness_margin, consensus_design, fiedler_value, mu_value,
    simulate_consensus, spectral_component_count, spg_learn, split_threshold, ConsensusProblem,
    Error, SignalMatrix, SolveReport, SolverOptions, SpgProblem, SynthConfig,
};

use crate::Command;

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    /// The numerics failed: infeasible problem, no convergence.
    Numeric(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Numeric(msg) => f.write_str(msg),
        }
    }
}

fn residual_summary(feas: &Feasibility) -> String {
    let mut parts = vec![
        format!("nonnegativity {:e}", feas.nonnegativity),
        format!("row_sum {:e}", feas.row_sum),
    ];
    for (name, value) in [
        ("diagonal", feas.diagonal),
        ("support", feas.support),
        ("spectral", feas.spectral),
    ] {
        if let Some(v) = value {
            parts.push(format!("{name} {v:e}"));
        }
    }
    parts.join(", ")
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged(report) => Failure::Numeric(format!(
                "solver did not reach a feasible point after {} iterations; residuals: {}; margin {:e}",
                report.iterations,
                residual_summary(&report.feasibility),
                report.margin
            )),
            Error::ProjectionNotConverged(ref r) | Error::EmptyIntersectionSuspected(ref r) => {
                let residuals: Vec<String> = r
                    .residuals
                    .iter()
                    .map(|s| format!("{} {:e}", s.kind.name(), s.distance))
                    .collect();
                Failure::Numeric(format!("{e}; residuals: {}", residuals.join(", ")))
            }
            Error::Infeasible(_) | Error::EigenNoConvergence { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Reads a graph file: edge-list CSV when the extension is `.csv`, JSON
/// otherwise.
fn read_graph(path: &Path) -> Result<NamedGraph, Failure> {
    let text = read_text(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let graph = if is_csv {
        let a = import_edgelist(&text, None)?;
        let names = conngraph::io::default_node_names(a.n());
        NamedGraph { a, names }
    } else {
        import_graph_json(&text)?
    };
    Ok(graph)
}

/// Writes `text` to `out`, where `-` means standard output.
fn write_output(out: &str, text: &str) -> CmdResult {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| usage(format!("cannot write to stdout: {e}")))
    } else {
        fs::write(out, text).map_err(|e| usage(format!("cannot write {out}: {e}")))
    }
}

fn check_positive(name: &str, value: f64) -> CmdResult {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(usage(format!(
            "--{name} must be a positive number, got {value}"
        )))
    }
}

fn report_solve(label: &str, r: &SolveReport) {
    eprintln!(
        "{label}: objective {} after {} iterations (converged: {}), margin {}, max residual {:e}",
        r.objective,
        r.iterations,
        r.converged,
        r.margin,
        r.max_residual()
    );
    for w in &r.warnings {
        let msg = match w {
            SolveWarning::DegenerateData => {
                "data cannot distinguish edges; every feasible graph is optimal".to_string()
            }
            SolveWarning::ConsensusNotGuaranteed { mu } => {
                format!("mu = {mu} >= 1: the consensus iteration need not converge")
            }
            SolveWarning::IterationLimit => "stopping rule not met before --max-iter".to_string(),
        };
        eprintln!("warning: {msg}");
    }
}

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Synth { n, m, seed, out } => {
            let x = gen_sinusoids(&SynthConfig::new(n, m, seed))?;
            write_output(&out, &write_timeseries_csv(&x)?)
        }
        Command::Learn {
            input,
            epsilon,
            connected,
            tol,
            max_iter,
            out,
        } => {
            check_positive("tol", tol)?;
            if max_iter == 0 {
                return Err(usage("--max-iter must be positive"));
            }
            let x = read_timeseries_csv(&input)
                .map_err(|e| usage(format!("{}: {e}", input.display())))?;
            let names = x.names_or_default();
            let problem = SpgProblem::new(x, connected.resolve(true)).with_epsilon(epsilon);
            let opts = SolverOptions {
                max_iter,
                splitting_tol: tol,
                ..SolverOptions::default()
            };
            let r = spg_learn(&problem, &opts)?;
            report_solve("learn", &r);
            write_output(&out, &export_graph(&r.a, GraphFormat::Json, Some(&names))?)
        }
        Command::Consensus {
            support,
            eta,
            connected,
            epsilon,
            max_iter,
            out,
        } => {
            if max_iter == 0 {
                return Err(usage("--max-iter must be positive"));
            }
            let graph = read_graph(&support)?;
            let mut problem = ConsensusProblem::new(&graph.a, eta);
            if connected.resolve(false) {
                problem = problem.connected(epsilon);
            }
            let opts = SolverOptions {
                max_iter,
                ..SolverOptions::default()
            };
            let r = consensus_design(&problem, &opts)?;
            report_solve("consensus", &r);
            eprintln!("mu: {}", mu_value(r.a.matrix())?);
            write_output(
                &out,
                &export_graph(&r.a, GraphFormat::Json, Some(&graph.names))?,
            )
        }
        Command::Check { graph, eig_tol } => {
            check_positive("eig-tol", eig_tol)?;
            let g = read_graph(&graph)?;
            let a = &g.a;
            let mut text = format!("nodes: {}\n", a.n());
            text += &format!("components_bfs: {}\n", component_count_bfs(a, 0.0).count);
            text += &format!(
                "components_spectral: {}\n",
                spectral_component_count(a, eig_tol)?
            );
            if a.n() >= 2 {
                text += &format!("fiedler: {}\n", fiedler_value(a)?);
            }
            text += &format!("margin: {}\n", connectedness_margin(a)?);
            let stochastic = a.row_sums().iter().all(|s| (s - 1.0).abs() <= 1e-6);
            if stochastic && a.n() >= 2 {
                text += &format!("mu: {}\n", mu_value(a.matrix())?);
            }
            write_output("-", &text)
        }
        Command::Export {
            graph,
            format,
            truncate,
            out,
        } => {
            let format: GraphFormat = format.parse()?;
            if !(truncate >= 0.0 && truncate.is_finite()) {
                return Err(usage(format!(
                    "--truncate must be nonnegative, got {truncate}"
                )));
            }
            let g = read_graph(&graph)?;
            let a = truncate_edges(&g.a, truncate);
            write_output(&out, &export_graph(&a, format, Some(&g.names))?)
        }
        Command::Hist {
            graph,
            bins,
            positive,
            out,
        } => {
            if bins == 0 {
                return Err(usage("--bins must be at least 1"));
            }
            let g = read_graph(&graph)?;
            let h = if positive {
                positive_weight_histogram(&g.a, bins)?
            } else {
                weight_histogram(&g.a, bins)?
            };
            write_output(&out, &h.to_csv())
        }
        Command::Threshold { n, k } => {
            let eta = split_threshold(n, k)?;
            write_output("-", &format!("{eta}\n"))
        }
        Command::Simulate {
            graph,
            x0,
            steps,
            out,
        } => {
            let g = read_graph(&graph)?;
            let start =
                read_timeseries_csv(&x0).map_err(|e| usage(format!("{}: {e}", x0.display())))?;
            if start.n() != g.a.n() {
                return Err(usage(format!(
                    "x0 has {} values but the graph has {} nodes",
                    start.n(),
                    g.a.n()
                )));
            }
            let x: Vec<f64> = start.values().row(0).to_vec();
            let traj = simulate_consensus(&g.a, &x, steps)?;
            let signals = SignalMatrix::new(traj, Some(g.names.clone()))?;
            write_output(&out, &write_timeseries_csv(&signals)?)
        }
    }
}
