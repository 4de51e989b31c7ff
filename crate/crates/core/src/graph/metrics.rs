//! Structural metrics: degree statistics, clustering, reciprocity, hub
//! scores and weak components.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub max_degree: usize,
    /// `degree_histogram[k]` = number of nodes with total degree `k`.
    pub degree_histogram: Vec<usize>,
}

/// Degree counts every edge endpoint (multi-edges included), so the average
/// is `2·edges/nodes` for both directed and undirected graphs.
pub fn degree_stats(graph: &Graph) -> DegreeStats {
    let degrees = graph.degrees();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let mut degree_histogram = vec![0usize; if degrees.is_empty() { 0 } else { max_degree + 1 }];
    for d in &degrees {
        degree_histogram[*d] += 1;
    }
    let average_degree =
        if degrees.is_empty() { 0.0 } else { 2.0 * graph.edge_count() as f64 / graph.node_count() as f64 };
    DegreeStats {
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        average_degree,
        max_degree,
        degree_histogram,
    }
}

/// Mean local clustering over all nodes of the undirected simple projection.
/// Nodes with fewer than two neighbours contribute zero.
pub fn clustering_coefficient(graph: &Graph) -> f64 {
    let n = graph.node_count();
    if n == 0 {
        return 0.0;
    }
    let adj = graph.undirected_adjacency();
    let sets: Vec<HashSet<usize>> = (0..n).map(|v| adj.neighbors(v).iter().map(|(u, _)| *u).collect()).collect();
    let mut total = 0.0;
    for v in 0..n {
        let nbrs = adj.neighbors(v);
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, (a, _)) in nbrs.iter().enumerate() {
            for (b, _) in &nbrs[i + 1..] {
                if sets[*a].contains(b) {
                    links += 1;
                }
            }
        }
        total += links as f64 / (k * (k - 1) / 2) as f64;
    }
    total / n as f64
}

/// Fraction of directed edges `(u,v)` whose reverse `(v,u)` also exists.
pub fn reciprocity(graph: &Graph) -> Result<f64, GraphError> {
    if !graph.directed() {
        return Err(GraphError::Contract("reciprocity is defined for directed graphs only".into()));
    }
    if graph.edge_count() == 0 {
        return Ok(0.0);
    }
    let pairs: HashSet<(NodeId, NodeId)> = graph.edges().iter().map(|e| (e.source, e.target)).collect();
    let reciprocated = graph.edges().iter().filter(|e| pairs.contains(&(e.target, e.source))).count();
    Ok(reciprocated as f64 / graph.edge_count() as f64)
}

/// Degree centrality normalised by the maximum degree.
pub fn hub_scores(graph: &Graph) -> Result<BTreeMap<NodeId, f64>, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::Contract("hub scores need a nonempty graph".into()));
    }
    let degrees = graph.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0);
    Ok(graph
        .node_ids()
        .into_iter()
        .zip(degrees)
        .map(|(id, d)| (id, if max == 0 { 0.0 } else { d as f64 / max as f64 }))
        .collect())
}

pub fn weakly_connected_components(graph: &Graph) -> usize {
    let n = graph.node_count();
    let index = graph.index();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in graph.edges() {
        let (a, b) = (find(&mut parent, index.of(e.source)), find(&mut parent, index.of(e.target)));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}

/// Induced subgraph on the `k` highest-degree nodes (ties broken by id).
pub fn top_k_by_degree(graph: &Graph, k: usize) -> Graph {
    let ids = graph.node_ids();
    let degrees = graph.degrees();
    let mut ranked: Vec<(usize, NodeId)> = degrees.into_iter().zip(ids).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let keep: HashSet<NodeId> = ranked.into_iter().take(k).map(|(_, id)| id).collect();

    let mut sub = Graph::new(graph.directed(), graph.meta.provenance);
    sub.meta = graph.meta.clone();
    for node in graph.nodes().filter(|n| keep.contains(&n.id)) {
        sub.add_node(node.clone()).expect("nodes of a valid graph are valid");
    }
    for e in graph.edges().iter().filter(|e| keep.contains(&e.source) && keep.contains(&e.target)) {
        sub.add_edge(e.clone()).expect("edges of a valid graph are valid");
    }
    sub
}

/// Everything the `metrics` command reports for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub directed: bool,
    pub degree: DegreeStats,
    pub clustering: f64,
    /// `None` for undirected graphs.
    pub reciprocity: Option<f64>,
    pub components: usize,
}

impl GraphSummary {
    pub fn of(graph: &Graph) -> Self {
        GraphSummary {
            directed: graph.directed(),
            degree: degree_stats(graph),
            clustering: clustering_coefficient(graph),
            reciprocity: reciprocity(graph).ok(),
            components: weakly_connected_components(graph),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_chain_graphs, Edge, EdgeKind, NodeState, Provenance};
    use proptest::prelude::*;

    fn build(directed: bool, n: u32, edges: &[(u32, u32)]) -> Graph {
        let mut g = Graph::new(directed, Provenance::Synthetic);
        for i in 0..n {
            g.add_node(NodeState::new(i)).unwrap();
        }
        for &(a, b) in edges {
            g.add_edge(Edge::new(a, b, EdgeKind::Reply)).unwrap();
        }
        g
    }

    /// Oracle: count triangles through each node by brute force over triples.
    fn brute_force_clustering(n: u32, edges: &[(u32, u32)]) -> f64 {
        let set: HashSet<(u32, u32)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        let mut total = 0.0;
        for v in 0..n {
            let nbrs: Vec<u32> = (0..n).filter(|&u| set.contains(&(v, u))).collect();
            let k = nbrs.len();
            if k < 2 {
                continue;
            }
            let mut t = 0;
            for i in 0..k {
                for j in i + 1..k {
                    if set.contains(&(nbrs[i], nbrs[j])) {
                        t += 1;
                    }
                }
            }
            total += t as f64 / (k * (k - 1) / 2) as f64;
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(clustering_coefficient(&generate_chain_graphs(5, 4, 0).unwrap()), 0.0);
        assert_eq!(clustering_coefficient(&build(false, 3, &[(0, 1), (1, 2), (0, 2)])), 1.0);
        let square = [(0, 1), (1, 2), (2, 3), (3, 0)];
        assert_eq!(brute_force_clustering(4, &square), 0.0);
        assert_eq!(clustering_coefficient(&build(false, 4, &square)), 0.0);
        assert_eq!(clustering_coefficient(&Graph::new(false, Provenance::Synthetic)), 0.0);
    }

    #[test]
    fn reciprocity_examples() {
        assert_eq!(reciprocity(&generate_chain_graphs(5, 4, 0).unwrap()).unwrap(), 0.0);
        assert_eq!(reciprocity(&build(true, 2, &[(0, 1), (1, 0)])).unwrap(), 1.0);
        let r = reciprocity(&build(true, 3, &[(0, 1), (1, 0), (1, 2)])).unwrap();
        assert_eq!(r, 2.0 / 3.0);
        assert!(reciprocity(&build(false, 2, &[(0, 1)])).is_err());
        assert_eq!(reciprocity(&build(true, 2, &[])).unwrap(), 0.0);
    }

    #[test]
    fn degree_examples() {
        // 10 nodes with 26 edges: average 5.20.
        let mut edges = Vec::new();
        'outer: for a in 0..10 {
            for b in a + 1..10 {
                if edges.len() == 26 {
                    break 'outer;
                }
                edges.push((a, b));
            }
        }
        assert_eq!(degree_stats(&build(false, 10, &edges)).average_degree, 5.2);
        let single = degree_stats(&build(false, 1, &[]));
        assert_eq!((single.average_degree, single.degree_histogram.clone()), (0.0, vec![1]));
        let star = degree_stats(&build(false, 6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]));
        assert_eq!(star.max_degree, 5);
        assert_eq!(star.average_degree, 10.0 / 6.0);
        assert_eq!(star.degree_histogram, vec![0, 5, 0, 0, 0, 1]);
        let empty = degree_stats(&Graph::new(false, Provenance::Synthetic));
        assert_eq!((empty.node_count, empty.average_degree, empty.max_degree), (0, 0.0, 0));
    }

    #[test]
    fn hub_examples() {
        let path = hub_scores(&build(false, 3, &[(0, 1), (1, 2)])).unwrap();
        assert_eq!(path.values().copied().collect::<Vec<_>>(), vec![0.5, 1.0, 0.5]);
        let with_isolated = hub_scores(&build(false, 3, &[(0, 1)])).unwrap();
        assert_eq!(with_isolated[&NodeId(2)], 0.0);
        assert_eq!(with_isolated[&NodeId(0)], 1.0);
        assert!(hub_scores(&Graph::new(false, Provenance::Synthetic)).is_err());
        assert!(hub_scores(&build(false, 2, &[])).unwrap().values().all(|v| *v == 0.0));
    }

    #[test]
    fn top_k_keeps_highest_degree() {
        let g = build(false, 6, &[(0, 1), (0, 2), (0, 3), (1, 2), (4, 5)]);
        let sub = top_k_by_degree(&g, 3);
        assert_eq!(sub.node_ids(), vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(sub.edge_count(), 3);
    }

    fn arb_edges() -> impl Strategy<Value = (u32, Vec<(u32, u32)>)> {
        (2u32..12).prop_flat_map(|n| {
            let pair = (0..n, 0..n).prop_filter("no self loops", |(a, b)| a != b);
            (Just(n), proptest::collection::vec(pair, 0..40))
        })
    }

    proptest! {
        #[test]
        fn clustering_matches_brute_force((n, edges) in arb_edges()) {
            let g = build(false, n, &edges);
            let c = clustering_coefficient(&g);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!((c - brute_force_clustering(n, &edges)).abs() < 1e-12);
        }

        #[test]
        fn degree_sum_is_twice_edge_count((n, edges) in arb_edges(), directed in any::<bool>()) {
            let g = build(directed, n, &edges);
            let stats = degree_stats(&g);
            prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
            prop_assert_eq!(stats.degree_histogram.iter().sum::<usize>(), n as usize);
            if directed {
                let r = reciprocity(&g).unwrap();
                prop_assert!((0.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn disjoint_paths_have_zero_clustering_and_reciprocity(k in 1usize..20, len in 2usize..8) {
            let g = generate_chain_graphs(k, len, 0).unwrap();
            prop_assert_eq!(clustering_coefficient(&g), 0.0);
            prop_assert_eq!(reciprocity(&g).unwrap(), 0.0);
            prop_assert_eq!(weakly_connected_components(&g), k);
            prop_assert_eq!(g.node_count(), k * len);
            prop_assert_eq!(g.edge_count(), k * (len - 1));
            // A graph is a forest iff components = nodes - edges.
            prop_assert_eq!(weakly_connected_components(&g), g.node_count() - g.edge_count());
        }
    }
}
