//! `conngraph`: learn connected graphs from signals, design consensus
//! weights, and inspect or export the results.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "conngraph",
    version,
    about = "Connected graph learning and consensus weight design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random sinusoids, one column per node, as CSV.
    Synth {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Learn a graph on which the input signals are smooth.
    Learn {
        /// Time-series CSV: a header of node names, then one sample per row.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[command(flatten)]
        connected: ConnectedFlag,
        /// Primal and dual residual target of the solver.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Design fast-averaging consensus weights on a given edge support.
    Consensus {
        /// Support graph (JSON, or edge-list CSV by `.csv` extension).
        #[arg(long)]
        support: PathBuf,
        /// Sparsity weight.
        #[arg(long)]
        eta: f64,
        #[command(flatten)]
        connected: ConnectedFlag,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Report connectivity diagnostics of a graph.
    Check {
        #[arg(long)]
        graph: PathBuf,
        /// Relative eigenvalue tolerance for the spectral component count.
        #[arg(long, default_value_t = 1e-8)]
        eig_tol: f64,
    },
    /// Write a graph as DOT, edge-list CSV or JSON after dropping small weights.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(long, default_value_t = 0.001)]
        truncate: f64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Histogram of the upper-triangular edge weights as CSV.
    Hist {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Count only strictly positive weights.
        #[arg(long)]
        positive: bool,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Sparsity weight above which the unconstrained consensus design has at
    /// least k components on n nodes.
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Run the consensus iteration x(t+1) = A x(t).
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        /// CSV with a header of node names; the first data row is x(0).
        #[arg(long)]
        x0: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

/// `--connected` / `--no-connected`; the last one given wins.
#[derive(Debug, Args)]
struct ConnectedFlag {
    /// Require the graph to be connected.
    #[arg(long, overrides_with = "no_connected")]
    connected: bool,
    /// Drop the connectedness constraint.
    #[arg(long, overrides_with = "connected")]
    no_connected: bool,
}

impl ConnectedFlag {
    fn resolve(&self, default: bool) -> bool {
        if self.connected {
            true
        } else if self.no_connected {
            false
        } else {
            default
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(match failure {
                Failure::Usage(_) => 1,
                Failure::Numeric(_) => 2,
            })
        }
    }
}
