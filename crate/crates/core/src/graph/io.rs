//! JSON graph documents and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Edge, EmotionLabel, Graph, GraphError, NodeState, Provenance};

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk layout of a graph file. Field order is the serialization order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: u32,
    pub directed: bool,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<serde_json::Value>,
    pub nodes: Vec<NodeState>,
    pub edges: Vec<Edge>,
}

impl From<&Graph> for GraphDocument {
    fn from(g: &Graph) -> Self {
        GraphDocument {
            schema_version: g.meta.schema_version,
            directed: g.directed(),
            provenance: g.meta.provenance,
            seed: g.meta.seed,
            annotations: g.meta.annotations.clone(),
            nodes: g.nodes().cloned().collect(),
            edges: g.edges().to_vec(),
        }
    }
}

impl TryFrom<GraphDocument> for Graph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> Result<Self, GraphError> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(GraphError::parse(
                "document",
                format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", doc.schema_version),
            ));
        }
        let mut g = Graph::new(doc.directed, doc.provenance);
        g.meta.seed = doc.seed;
        g.meta.annotations = doc.annotations;
        for (i, node) in doc.nodes.into_iter().enumerate() {
            let id = node.id;
            g.add_node(node).map_err(|e| GraphError::parse(format!("nodes[{i}] (id {id})"), inner(e)))?;
        }
        for (i, edge) in doc.edges.into_iter().enumerate() {
            let label = format!("edges[{i}] ({} -> {})", edge.source, edge.target);
            if !doc.directed && edge.source > edge.target {
                return Err(GraphError::parse(label, "undirected edge is not in canonical order"));
            }
            g.add_edge(edge).map_err(|e| GraphError::parse(label, inner(e)))?;
        }
        Ok(g)
    }
}

fn inner(e: GraphError) -> String {
    match e {
        GraphError::Argument(m) | GraphError::Contract(m) => m,
        GraphError::Parse { message, .. } => message,
    }
}

/// Pretty JSON with a trailing newline; identical graphs give identical bytes.
pub fn serialize_graph(graph: &Graph) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&GraphDocument::from(graph)).expect("graph documents always serialize");
    out.push(b'\n');
    out
}

pub fn deserialize_graph(bytes: &[u8]) -> Result<Graph, GraphError> {
    let doc: GraphDocument = serde_json::from_slice(bytes).map_err(|e| GraphError::parse("document", e.to_string()))?;
    Graph::try_from(doc)
}

fn emotion_color(e: EmotionLabel) -> &'static str {
    match e {
        EmotionLabel::Positive => "forestgreen",
        EmotionLabel::Neutral => "gray60",
        EmotionLabel::Negative => "firebrick",
    }
}

/// Graphviz rendering: nodes coloured by emotion, edges labelled by kind.
pub fn to_dot(graph: &Graph) -> String {
    let (keyword, arrow) = if graph.directed() { ("digraph", "->") } else { ("graph", "--") };
    let mut out = String::new();
    writeln!(out, "{keyword} emograph {{").unwrap();
    for n in graph.nodes() {
        let label = n.name.clone().unwrap_or_else(|| n.id.to_string()).replace('"', "\\\"");
        write!(
            out,
            "  n{} [label=\"{}\", emotion=\"{}\", color=\"{}\"",
            n.id,
            label,
            n.emotion,
            emotion_color(n.emotion)
        )
        .unwrap();
        if let Some(r) = n.activation_round {
            write!(out, ", round={r}").unwrap();
        }
        writeln!(out, "];").unwrap();
    }
    for e in graph.edges() {
        write!(out, "  n{} {arrow} n{} [label=\"{}\"", e.source, e.target, e.kind).unwrap();
        if let Some(l) = e.label {
            write!(out, ", emotion=\"{l}\", color=\"{}\"", emotion_color(l)).unwrap();
        }
        writeln!(out, "];").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_chain_graphs, generate_er_graph, init_node_attributes, EdgeKind, EmotionDistribution};
    use proptest::prelude::*;

    #[test]
    fn chain_round_trip_preserves_counts() {
        let g = generate_chain_graphs(100, 4, 11).unwrap();
        let back = deserialize_graph(&serialize_graph(&g)).unwrap();
        assert_eq!((back.node_count(), back.edge_count()), (400, 300));
        assert_eq!(back, g);
    }

    #[test]
    fn dangling_endpoint_is_a_parse_error_naming_the_record() {
        let g = generate_chain_graphs(1, 3, 0).unwrap();
        let mut doc: serde_json::Value = serde_json::from_slice(&serialize_graph(&g)).unwrap();
        doc["edges"][1]["target"] = serde_json::json!(99);
        let err = deserialize_graph(&serde_json::to_vec(&doc).unwrap()).unwrap_err();
        match err {
            GraphError::Parse { record, .. } => assert!(record.starts_with("edges[1]"), "{record}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_and_range_checks() {
        let g = generate_chain_graphs(1, 2, 0).unwrap();
        let mut doc: serde_json::Value = serde_json::from_slice(&serialize_graph(&g)).unwrap();
        doc["schema_version"] = serde_json::json!(2);
        assert!(matches!(deserialize_graph(&serde_json::to_vec(&doc).unwrap()), Err(GraphError::Parse { .. })));

        let mut doc: serde_json::Value = serde_json::from_slice(&serialize_graph(&g)).unwrap();
        doc["nodes"][1]["credibility"] = serde_json::json!(1.7);
        match deserialize_graph(&serde_json::to_vec(&doc).unwrap()).unwrap_err() {
            GraphError::Parse { record, .. } => assert_eq!(record, "nodes[1] (id 1)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dot_has_colours_and_kinds() {
        let mut g = generate_chain_graphs(1, 2, 0).unwrap();
        g.update_node(crate::graph::NodeId(0), |n| n.emotion = EmotionLabel::Positive).unwrap();
        let dot = to_dot(&g);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("n0 [label=\"0\", emotion=\"positive\", color=\"forestgreen\"];"));
        assert!(dot.contains(&format!("n0 -> n1 [label=\"{}\"];", EdgeKind::Reply)));
    }

    proptest! {
        #[test]
        fn generated_graphs_round_trip(n in 1usize..25, p in 0.0f64..=1.0, seed in any::<u64>(), attr_seed in any::<u64>()) {
            let g = generate_er_graph(n, p, seed).unwrap();
            let g = init_node_attributes(g, &EmotionDistribution::UNIFORM, attr_seed).unwrap();
            let bytes = serialize_graph(&g);
            let back = deserialize_graph(&bytes).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(serialize_graph(&back), bytes);
        }
    }
}
