//! Signal matrices, synthetic sinusoid data, time-series CSV ingestion, graph
//! serialization, truncation, and weight histograms.

mod formats;
mod postprocess;
mod signal;
mod synth;
mod timeseries;

pub use formats::{
    default_node_names, export_graph, import_edgelist, import_graph_json, GraphFormat, NamedGraph,
};
pub use postprocess::{
    positive_weight_histogram, truncate_edges, weight_histogram, WeightHistogram,
};
pub use signal::SignalMatrix;
pub use synth::{gen_sinusoids, SynthConfig};
pub use timeseries::{parse_timeseries_csv, read_timeseries_csv, write_timeseries_csv};

/// Shortest decimal text that parses back to exactly `x`.
pub(crate) fn format_real(x: f64) -> String {
    format!("{x}")
}
