//! Labelled graphs in tabular form.
//!
//! A dataset is a pair of CSV files:
//!
//! - `nodes.csv`: `id,f0,...,f{d-1},label`
//! - `edges.csv`: `source,target`
//!
//! Edges are undirected. Ingestion drops self-loops and repeated pairs,
//! where `(a, b)` and `(b, a)` count as the same edge.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    node_ids: Vec<i64>,
    features: Array2<f64>,
    labels: Vec<usize>,
    /// Node-index pairs in first-seen orientation.
    edges: Vec<(usize, usize)>,
    num_classes: usize,
}

/// What ingestion removed from the raw edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: GraphDataset,
    pub stats: IngestStats,
}

impl GraphDataset {
    /// Builds a dataset from node rows and an id-keyed edge list.
    ///
    /// The number of classes is `max(label) + 1`.
    pub fn new(
        node_ids: Vec<i64>,
        features: Array2<f64>,
        labels: Vec<usize>,
        edges: &[(i64, i64)],
    ) -> Result<(Self, IngestStats)> {
        Self::build(node_ids, features, labels, edges.iter().map(|&e| (e, 0))).map_err(
            |e| match e {
                BuildError::Other(e) => e,
                BuildError::Unknown { id, .. } => {
                    Error::invalid(format!("edge endpoint {id} is not a known node id"))
                }
            },
        )
    }

    fn build(
        node_ids: Vec<i64>,
        features: Array2<f64>,
        labels: Vec<usize>,
        edges: impl Iterator<Item = ((i64, i64), u64)>,
    ) -> std::result::Result<(Self, IngestStats), BuildError> {
        let n = node_ids.len();
        if features.nrows() != n || labels.len() != n {
            return Err(BuildError::Other(Error::invalid(format!(
                "{n} node ids but {} feature rows and {} labels",
                features.nrows(),
                labels.len()
            ))));
        }
        if n == 0 {
            return Err(BuildError::Other(Error::invalid("graph has no nodes")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(BuildError::Other(Error::invalid(
                "node features must be finite",
            )));
        }

        let mut index = HashMap::with_capacity(n);
        for (i, &id) in node_ids.iter().enumerate() {
            if index.insert(id, i).is_some() {
                return Err(BuildError::Other(Error::invalid(format!(
                    "duplicate node id {id}"
                ))));
            }
        }

        let mut stats = IngestStats::default();
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for ((src, dst), line) in edges {
            let a = *index
                .get(&src)
                .ok_or(BuildError::Unknown { id: src, line })?;
            let b = *index
                .get(&dst)
                .ok_or(BuildError::Unknown { id: dst, line })?;
            if a == b {
                stats.self_loops += 1;
            } else if seen.insert((a.min(b), a.max(b))) {
                kept.push((a, b));
            } else {
                stats.duplicate_edges += 1;
            }
        }

        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut counts = vec![0usize; num_classes];
        for &l in &labels {
            counts[l] += 1;
        }
        for (c, _) in counts.iter().enumerate().filter(|(_, &k)| k == 0) {
            log::warn!("class {c} has no nodes");
        }

        Ok((
            GraphDataset {
                node_ids,
                features,
                labels,
                edges: kept,
                num_classes,
            },
            stats,
        ))
    }

    pub fn node_ids(&self) -> &[i64] {
        &self.node_ids
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Same graph with replacement labels.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.num_nodes() {
            return Err(Error::invalid(format!(
                "expected {} labels, got {}",
                self.num_nodes(),
                labels.len()
            )));
        }
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        Ok(GraphDataset {
            labels,
            num_classes,
            ..self.clone()
        })
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Writes the dataset back out in the `nodes.csv` / `edges.csv` format.
    pub fn write_csv(&self, nodes_path: &Path, edges_path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("id");
        for j in 0..self.num_features() {
            out.push_str(&format!(",f{j}"));
        }
        out.push_str(",label\n");
        for (i, row) in self.features.outer_iter().enumerate() {
            out.push_str(&self.node_ids[i].to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push_str(&format!(",{}\n", self.labels[i]));
        }
        write_file(nodes_path, &out)?;

        let mut out = String::from("source,target\n");
        for &(a, b) in &self.edges {
            out.push_str(&format!("{},{}\n", self.node_ids[a], self.node_ids[b]));
        }
        write_file(edges_path, &out)
    }
}

enum BuildError {
    Unknown { id: i64, line: u64 },
    Other(Error),
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    File::create(path)
        .and_then(|mut f| f.write_all(contents.as_bytes()))
        .map_err(|e| Error::io(path, e))
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

fn parse_field<T: FromStr>(path: &Path, line: u64, what: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("{what}: cannot parse {raw:?}"),
    })
}

type NodeRows = (Vec<i64>, Array2<f64>, Vec<usize>);

fn read_nodes(nodes_path: &Path) -> Result<NodeRows> {
    let mut nodes = open_csv(nodes_path)?;
    let header = nodes
        .headers()
        .map_err(|e| csv_error(nodes_path, e))?
        .clone();
    let width = header.len();
    if width < 3 || &header[0] != "id" || &header[width - 1] != "label" {
        return Err(Error::Parse {
            path: nodes_path.to_path_buf(),
            line: 1,
            message: "header must be id,f0,...,f{d-1},label with at least one feature".into(),
        });
    }
    let dim = width - 2;

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in nodes.records() {
        let record = record.map_err(|e| csv_error(nodes_path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        ids.push(parse_field::<i64>(nodes_path, line, "id", &record[0])?);
        for (j, raw) in record.iter().skip(1).take(dim).enumerate() {
            let v: f64 = parse_field(nodes_path, line, &format!("feature f{j}"), raw)?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: nodes_path.to_path_buf(),
                    line,
                    message: format!("feature f{j} is not finite"),
                });
            }
            values.push(v);
        }
        labels.push(parse_field::<usize>(
            nodes_path,
            line,
            "label",
            &record[width - 1],
        )?);
    }
    let features = Array2::from_shape_vec((ids.len(), dim), values).expect("row widths checked");
    Ok((ids, features, labels))
}

/// Reads a dataset from `nodes.csv` and `edges.csv`.
pub fn load_graph(nodes_path: &Path, edges_path: &Path) -> Result<LoadedGraph> {
    let (ids, features, labels) = read_nodes(nodes_path)?;

    let mut edges_reader = open_csv(edges_path)?;
    let header = edges_reader
        .headers()
        .map_err(|e| csv_error(edges_path, e))?
        .clone();
    if header.len() != 2 || &header[0] != "source" || &header[1] != "target" {
        return Err(Error::Parse {
            path: edges_path.to_path_buf(),
            line: 1,
            message: "header must be source,target".into(),
        });
    }
    let mut edges = Vec::new();
    for record in edges_reader.records() {
        let record = record.map_err(|e| csv_error(edges_path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let src = parse_field::<i64>(edges_path, line, "source", &record[0])?;
        let dst = parse_field::<i64>(edges_path, line, "target", &record[1])?;
        edges.push(((src, dst), line));
    }

    let (graph, stats) =
        GraphDataset::build(ids, features, labels, edges.into_iter()).map_err(|e| match e {
            BuildError::Unknown { id, line } => Error::UnknownEndpoint {
                path: edges_path.to_path_buf(),
                line,
                id,
            },
            BuildError::Other(Error::InvalidArgument(message)) => Error::Parse {
                path: nodes_path.to_path_buf(),
                line: 0,
                message,
            },
            BuildError::Other(e) => e,
        })?;
    if stats.duplicate_edges + stats.self_loops > 0 {
        log::info!(
            "{}: dropped {} duplicate edge(s) and {} self-loop(s)",
            edges_path.display(),
            stats.duplicate_edges,
            stats.self_loops
        );
    }
    Ok(LoadedGraph { graph, stats })
}

/// Reads `nodes.csv` alone; the resulting graph has no edges.
pub fn load_nodes(nodes_path: &Path) -> Result<GraphDataset> {
    let (ids, features, labels) = read_nodes(nodes_path)?;
    GraphDataset::new(ids, features, labels, &[])
        .map(|(g, _)| g)
        .map_err(|e| match e {
            Error::InvalidArgument(message) => Error::Parse {
                path: nodes_path.to_path_buf(),
                line: 0,
                message,
            },
            e => e,
        })
}

/// Edge label agreement counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomophilyReport {
    pub e_same: usize,
    pub e_diff: usize,
    pub e_total: usize,
    pub homophily: f64,
    pub heterophily: f64,
}

/// Fraction of edges joining same-label nodes.
pub fn homophily(graph: &GraphDataset) -> Result<HomophilyReport> {
    let e_total = graph.edges.len();
    if e_total == 0 {
        return Err(Error::UndefinedRatio(
            "homophily needs at least one edge".into(),
        ));
    }
    let e_same = graph
        .edges
        .iter()
        .filter(|&&(a, b)| graph.labels[a] == graph.labels[b])
        .count();
    let e_diff = e_total - e_same;
    let homophily = e_same as f64 / e_total as f64;
    Ok(HomophilyReport {
        e_same,
        e_diff,
        e_total,
        homophily,
        heterophily: 1.0 - homophily,
    })
}

/// Mean of each node's neighbour feature vectors. Isolated nodes keep
/// their own features.
pub fn mean_aggregate(graph: &GraphDataset) -> Array2<f64> {
    mean_aggregate_with(graph, Execution::default())
}

pub fn mean_aggregate_with(graph: &GraphDataset, exec: Execution) -> Array2<f64> {
    let adj = graph.adjacency();
    let (n, d) = graph.features.dim();
    let feats = &graph.features;
    let mut out = vec![0.0; n * d];
    exec::for_each_row_mut(exec, &mut out, d, |v, row| {
        let neighbours = &adj[v];
        if neighbours.is_empty() {
            row.iter_mut().zip(feats.row(v)).for_each(|(o, &x)| *o = x);
            return;
        }
        for &u in neighbours {
            row.iter_mut().zip(feats.row(u)).for_each(|(o, &x)| *o += x);
        }
        let k = neighbours.len() as f64;
        row.iter_mut().for_each(|o| *o /= k);
    });
    Array2::from_shape_vec((n, d), out).expect("shape matches buffer")
}

/// Which feature blocks feed the chaos transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadingStrategy {
    #[serde(rename = "original")]
    OriginalOnly,
    #[serde(rename = "aggregated")]
    AggregatedOnly,
    /// Original columns followed by aggregated columns.
    #[serde(rename = "dual")]
    DualLoading,
}

impl LoadingStrategy {
    pub const ALL: [LoadingStrategy; 3] = [
        LoadingStrategy::OriginalOnly,
        LoadingStrategy::AggregatedOnly,
        LoadingStrategy::DualLoading,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LoadingStrategy::OriginalOnly => "original",
            LoadingStrategy::AggregatedOnly => "aggregated",
            LoadingStrategy::DualLoading => "dual",
        }
    }

    pub fn uses_edges(self) -> bool {
        self != LoadingStrategy::OriginalOnly
    }

    /// Number of assembled columns for `d` raw features.
    pub fn width(self, d: usize) -> usize {
        match self {
            LoadingStrategy::DualLoading => 2 * d,
            _ => d,
        }
    }
}

impl fmt::Display for LoadingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoadingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(LoadingStrategy::OriginalOnly),
            "aggregated" => Ok(LoadingStrategy::AggregatedOnly),
            "dual" => Ok(LoadingStrategy::DualLoading),
            other => Err(Error::invalid(format!(
                "unknown loading strategy {other:?} (expected original, aggregated or dual)"
            ))),
        }
    }
}

/// Raw (unnormalized) input matrix for a loading strategy.
pub fn assemble_inputs(graph: &GraphDataset, strategy: LoadingStrategy) -> Array2<f64> {
    match strategy {
        LoadingStrategy::OriginalOnly => graph.features.clone(),
        LoadingStrategy::AggregatedOnly => mean_aggregate(graph),
        LoadingStrategy::DualLoading => {
            let agg = mean_aggregate(graph);
            concatenate(Axis(1), &[graph.features.view(), agg.view()]).expect("row counts agree")
        }
    }
}
