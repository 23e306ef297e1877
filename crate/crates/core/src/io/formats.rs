use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::format_real;
use crate::error::{Error, ParseError, Result};
use crate::graph::AdjacencyMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
    EdgeList,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "dot" => Ok(Self::Dot),
            "edgelist" | "edgelist-csv" | "csv" => Ok(Self::EdgeList),
            _ => Err(Error::UnknownFormat(s.to_owned())),
        }
    }
}

/// A graph together with its node labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedGraph {
    pub a: AdjacencyMatrix,
    pub names: Vec<String>,
}

pub fn default_node_names(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("node_{k}")).collect()
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct LoopRecord {
    i: usize,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    n: usize,
    nodes: Vec<String>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    self_loops: Vec<LoopRecord>,
}

/// Serializes `a` as JSON, DOT, or an edge-list CSV. Only edges `i < j` with
/// positive weight are written; positive diagonal entries go to
/// `self_loops` (JSON) or `i,i,w` rows (edge list) and are omitted from DOT.
pub fn export_graph(
    a: &AdjacencyMatrix,
    format: GraphFormat,
    names: Option<&[String]>,
) -> Result<String> {
    let n = a.n();
    let names = match names {
        Some(names) if names.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: names.len(),
            })
        }
        Some(names) => names.to_vec(),
        None => default_node_names(n),
    };
    let loops: Vec<(usize, f64)> = (0..n)
        .map(|k| (k, a.weight(k, k)))
        .filter(|&(_, w)| w > 0.0)
        .collect();

    let text = match format {
        GraphFormat::Json => {
            let doc = GraphDocument {
                n,
                nodes: names,
                edges: a.edges().map(|(i, j, w)| EdgeRecord { i, j, w }).collect(),
                self_loops: loops
                    .into_iter()
                    .map(|(i, w)| LoopRecord { i, w })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(ParseError::from)?;
            s.push('\n');
            s
        }
        GraphFormat::EdgeList => {
            let mut s = String::from("i,j,w\n");
            let mut rows: Vec<(usize, usize, f64)> = a.edges().collect();
            rows.extend(loops.into_iter().map(|(k, w)| (k, k, w)));
            rows.sort_by_key(|&(i, j, _)| (i, j));
            for (i, j, w) in rows {
                writeln!(s, "{i},{j},{}", format_real(w)).unwrap();
            }
            s
        }
        GraphFormat::Dot => {
            let mut s = String::from("graph G {\n");
            for (k, name) in names.iter().enumerate() {
                writeln!(s, "  {k} [label=\"{}\"];", escape_dot(name)).unwrap();
            }
            for (i, j, w) in a.edges() {
                let w = format_real(w);
                writeln!(s, "  {i} -- {j} [weight={w}, label=\"{w}\"];").unwrap();
            }
            s.push_str("}\n");
            s
        }
    };
    Ok(text)
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn set_weight(w: &mut Array2<f64>, i: usize, j: usize, value: f64, n: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(
            ParseError::Graph(format!("edge ({i}, {j}) out of range for {n} nodes")).into(),
        );
    }
    if !value.is_finite() || value < 0.0 {
        return Err(
            ParseError::Graph(format!("edge ({i}, {j}) has invalid weight {value}")).into(),
        );
    }
    if w[[i, j]] != 0.0 {
        return Err(ParseError::Graph(format!("edge ({i}, {j}) listed twice")).into());
    }
    w[[i, j]] = value;
    w[[j, i]] = value;
    Ok(())
}

/// Reads the JSON written by [`export_graph`].
pub fn import_graph_json(text: &str) -> Result<NamedGraph> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(ParseError::from)?;
    let n = doc.n;
    if doc.nodes.len() != n {
        return Err(ParseError::Graph(format!(
            "`nodes` has {} names for n = {n}",
            doc.nodes.len()
        ))
        .into());
    }
    let mut w = Array2::zeros((n, n));
    for e in &doc.edges {
        set_weight(&mut w, e.i, e.j, e.w, n)?;
    }
    for l in &doc.self_loops {
        set_weight(&mut w, l.i, l.i, l.w, n)?;
    }
    Ok(NamedGraph {
        a: AdjacencyMatrix::new(w)?,
        names: doc.nodes,
    })
}

/// Reads an `i,j,w` edge list. Without `n`, the node count is one more than
/// the largest index seen.
pub fn import_edgelist(text: &str, n: Option<usize>) -> Result<AdjacencyMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(ParseError::from)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["i", "j", "w"] {
        return Err(ParseError::Graph("edge list header must be `i,j,w`".into()).into());
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(ParseError::from)?;
        let row = idx + 2;
        let cell = |c: usize| -> Result<&str> {
            record.get(c).ok_or_else(|| {
                ParseError::Ragged {
                    row,
                    expected: 3,
                    found: record.len(),
                }
                .into()
            })
        };
        let index = |c: usize| -> Result<usize> {
            let s = cell(c)?;
            s.parse().map_err(|_| {
                ParseError::NotNumeric {
                    row,
                    col: c + 1,
                    cell: s.to_owned(),
                }
                .into()
            })
        };
        let (i, j) = (index(0)?, index(1)?);
        let s = cell(2)?;
        let w: f64 = s.parse().map_err(|_| ParseError::NotNumeric {
            row,
            col: 3,
            cell: s.to_owned(),
        })?;
        rows.push((i, j, w));
    }
    let n = n.unwrap_or_else(|| {
        rows.iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0)
    });
    let mut w = Array2::zeros((n, n));
    for (i, j, value) in rows {
        set_weight(&mut w, i, j, value, n)?;
    }
    AdjacencyMatrix::new(w)
}
