use std::fs;

use ndarray::{s, Array2};
use neurochaos::graph::IngestStats;
use neurochaos::{
    assemble_inputs, homophily, load_graph, mean_aggregate, Error, GraphDataset, LoadingStrategy,
};
use proptest::prelude::*;
use tempfile::TempDir;

#[derive(Clone, Debug)]
struct RawGraph {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

fn raw_graph(max_nodes: usize, dim: usize) -> impl Strategy<Value = RawGraph> {
    (2..=max_nodes).prop_flat_map(move |n| {
        (
            prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), n),
            prop::collection::vec(0usize..3, n),
            prop::collection::vec((0..n, 0..n), 0..3 * n),
        )
            .prop_map(|(features, labels, edges)| RawGraph {
                features,
                labels,
                edges,
            })
    })
}

fn build(raw: &RawGraph) -> (GraphDataset, IngestStats) {
    let n = raw.labels.len();
    let d = raw.features[0].len();
    let ids = (0..n as i64).collect();
    let x = Array2::from_shape_vec((n, d), raw.features.concat()).unwrap();
    let edges: Vec<(i64, i64)> = raw
        .edges
        .iter()
        .map(|&(a, b)| (a as i64, b as i64))
        .collect();
    GraphDataset::new(ids, x, raw.labels.clone(), &edges).unwrap()
}

/// Unique undirected non-loop edges as a sorted set of sorted pairs.
fn edge_set(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut set: Vec<(usize, usize)> = edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    set.sort_unstable();
    set.dedup();
    set
}

/// Brute force: for every node, scan every raw edge for neighbours.
fn aggregate_oracle(raw: &RawGraph) -> Vec<Vec<f64>> {
    let set = edge_set(&raw.edges);
    let d = raw.features[0].len();
    (0..raw.labels.len())
        .map(|v| {
            let nbrs: Vec<usize> = set
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            if nbrs.is_empty() {
                return raw.features[v].clone();
            }
            (0..d)
                .map(|j| nbrs.iter().map(|&u| raw.features[u][j]).sum::<f64>() / nbrs.len() as f64)
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn homophily_matches_brute_force(raw in raw_graph(12, 2)) {
        let (g, stats) = build(&raw);
        let set = edge_set(&raw.edges);
        prop_assert_eq!(g.edges().len(), set.len());
        prop_assert_eq!(
            stats.self_loops,
            raw.edges.iter().filter(|(a, b)| a == b).count()
        );
        match homophily(&g) {
            Ok(r) => {
                let same = set.iter().filter(|&&(a, b)| raw.labels[a] == raw.labels[b]).count();
                prop_assert_eq!(r.e_same, same);
                prop_assert_eq!(r.e_diff, set.len() - same);
                prop_assert_eq!(r.e_total, set.len());
                prop_assert_eq!(r.homophily, same as f64 / set.len() as f64);
                prop_assert_eq!(r.homophily + r.heterophily, 1.0);
            }
            Err(Error::UndefinedRatio(_)) => prop_assert!(set.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn homophily_invariant_under_relabeling(raw in raw_graph(12, 1), offset in 1i64..1000) {
        let (g, _) = build(&raw);
        let n = raw.labels.len();
        // reverse node order, shift ids, reverse and flip edges
        let order: Vec<usize> = (0..n).rev().collect();
        let ids: Vec<i64> = order.iter().map(|&i| i as i64 * 7 + offset).collect();
        let x = Array2::from_shape_fn((n, 1), |(r, _)| raw.features[order[r]][0]);
        let labels = order.iter().map(|&i| raw.labels[i]).collect();
        let edges: Vec<(i64, i64)> = raw
            .edges
            .iter()
            .rev()
            .map(|&(a, b)| (b as i64 * 7 + offset, a as i64 * 7 + offset))
            .collect();
        let (h, _) = GraphDataset::new(ids, x, labels, &edges).unwrap();
        prop_assert_eq!(homophily(&g).ok(), homophily(&h).ok());
    }

    #[test]
    fn aggregation_matches_brute_force(raw in raw_graph(12, 3)) {
        let (g, _) = build(&raw);
        let agg = mean_aggregate(&g);
        for (v, want) in aggregate_oracle(&raw).iter().enumerate() {
            for (j, w) in want.iter().enumerate() {
                prop_assert!((agg[(v, j)] - w).abs() <= 1e-12);
            }
        }
        let agg_only = assemble_inputs(&g, LoadingStrategy::AggregatedOnly);
        prop_assert_eq!(&agg_only, &agg);
    }

    #[test]
    fn aggregation_ignores_edge_order_and_direction(raw in raw_graph(10, 2)) {
        let (g, _) = build(&raw);
        let flipped = RawGraph {
            edges: raw.edges.iter().rev().map(|&(a, b)| (b, a)).collect(),
            ..raw.clone()
        };
        let (h, _) = build(&flipped);
        prop_assert_eq!(mean_aggregate(&g), mean_aggregate(&h));
    }

    #[test]
    fn dual_loading_prefix_is_original(raw in raw_graph(10, 3)) {
        let (g, _) = build(&raw);
        let dual = assemble_inputs(&g, LoadingStrategy::DualLoading);
        prop_assert_eq!(dual.ncols(), 6);
        prop_assert_eq!(dual.slice(s![.., ..3]), assemble_inputs(&g, LoadingStrategy::OriginalOnly));
        prop_assert_eq!(dual.slice(s![.., 3..]), mean_aggregate(&g));
    }

    #[test]
    fn csv_round_trip(raw in raw_graph(8, 2)) {
        let (g, _) = build(&raw);
        let dir = TempDir::new().unwrap();
        let (np, ep) = (dir.path().join("nodes.csv"), dir.path().join("edges.csv"));
        g.write_csv(&np, &ep).unwrap();
        let back = load_graph(&np, &ep).unwrap();
        prop_assert_eq!(back.stats, IngestStats::default());
        prop_assert_eq!(back.graph, g);
    }
}

fn write(dir: &TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn load_drops_duplicates() {
    let dir = TempDir::new().unwrap();
    let n = write(&dir, "nodes.csv", "id,f0,label\n1,0.5,0\n2,0.25,1\n");
    let e = write(&dir, "edges.csv", "source,target\n1,2\n1,2\n2,2\n");
    let loaded = load_graph(&n, &e).unwrap();
    assert_eq!(loaded.graph.edges().len(), 1);
    assert_eq!(loaded.stats.duplicate_edges, 1);
    assert_eq!(loaded.stats.self_loops, 1);
}

#[test]
fn load_unknown_endpoint() {
    let dir = TempDir::new().unwrap();
    let n = write(&dir, "nodes.csv", "id,f0,label\n1,0.5,0\n2,0.25,1\n");
    let e = write(&dir, "edges.csv", "source,target\n1,2\n2,99\n");
    match load_graph(&n, &e) {
        Err(Error::UnknownEndpoint { id, line, .. }) => {
            assert_eq!(id, 99);
            assert_eq!(line, 3);
        }
        other => panic!("expected UnknownEndpoint, got {other:?}"),
    }
}

#[test]
fn load_reports_line_numbers() {
    let dir = TempDir::new().unwrap();
    let e = write(&dir, "edges.csv", "source,target\n");

    let n = write(
        &dir,
        "nodes.csv",
        "id,f0,f1,label\n1,0.5,0.1,0\n2,abc,0.3,1\n",
    );
    let err = load_graph(&n, &e).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

    let n = write(&dir, "nodes.csv", "id,f0,f1,label\n1,0.5,0.1,0\n2,0.3,1\n");
    let err = load_graph(&n, &e).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

    let n = write(&dir, "nodes.csv", "node,f0,label\n1,0.5,0\n");
    assert!(matches!(
        load_graph(&n, &e),
        Err(Error::Parse { line: 1, .. })
    ));

    let n = write(&dir, "nodes.csv", "id,f0,label\n1,NaN,0\n");
    assert!(matches!(
        load_graph(&n, &e),
        Err(Error::Parse { line: 2, .. })
    ));
}

#[test]
fn load_missing_file() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    assert!(matches!(
        load_graph(&missing, &missing),
        Err(Error::Io { .. })
    ));
}
