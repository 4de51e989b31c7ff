//! Attributed social graph shared by every stage: synthetic, LLM-simulated
//! and ingested real graphs all use the same container.

mod generate;
mod io;
mod metrics;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_chain_graphs, generate_er_graph, init_node_attributes, EmotionDistribution};
pub use io::{deserialize_graph, serialize_graph, to_dot, GraphDocument, SCHEMA_VERSION};
pub use metrics::{
    clustering_coefficient, degree_stats, hub_scores, reciprocity, top_k_by_degree, weakly_connected_components,
    DegreeStats, GraphSummary,
};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error in {record}: {message}")]
    Parse { record: String, message: String },
}

impl GraphError {
    pub(crate) fn parse(record: impl Into<String>, message: impl Into<String>) -> Self {
        GraphError::Parse { record: record.into(), message: message.into() }
    }
}

/// Three-valued emotional state with a fixed numeric encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Positive,
    Neutral,
    Negative,
}

impl EmotionLabel {
    /// Class order used by matrices and classifiers: positive, neutral, negative.
    pub const ALL: [EmotionLabel; 3] = [EmotionLabel::Positive, EmotionLabel::Neutral, EmotionLabel::Negative];

    pub fn value(self) -> f64 {
        match self {
            EmotionLabel::Positive => 1.0,
            EmotionLabel::Neutral => 0.0,
            EmotionLabel::Negative => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Option<Self> {
        if v == 1.0 {
            Some(EmotionLabel::Positive)
        } else if v == 0.0 {
            Some(EmotionLabel::Neutral)
        } else if v == -1.0 {
            Some(EmotionLabel::Negative)
        } else {
            None
        }
    }

    pub fn index(self) -> usize {
        match self {
            EmotionLabel::Positive => 0,
            EmotionLabel::Neutral => 1,
            EmotionLabel::Negative => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Positive => "positive",
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Negative => "negative",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EmotionLabel {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(EmotionLabel::Positive),
            "neutral" | "neu" => Ok(EmotionLabel::Neutral),
            "negative" | "neg" => Ok(EmotionLabel::Negative),
            other => Err(GraphError::Argument(format!("unknown emotion label '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    /// User handle for ingested graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub emotion: EmotionLabel,
    /// Emotion before any diffusion touched the node; used as the input
    /// feature when it differs from the final `emotion`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_emotion: Option<EmotionLabel>,
    pub credibility: f64,
    pub susceptibility: f64,
    pub post_frequency: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_round: Option<u32>,
    /// Accepted from input files, never synthesized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account_age_days: Option<u32>,
}

impl NodeState {
    pub fn new(id: impl Into<NodeId>) -> Self {
        NodeState {
            id: id.into(),
            name: None,
            emotion: EmotionLabel::Neutral,
            initial_emotion: None,
            credibility: 0.5,
            susceptibility: 0.5,
            post_frequency: 0,
            activation_round: None,
            account_age_days: None,
        }
    }

    pub fn with_emotion(mut self, emotion: EmotionLabel) -> Self {
        self.emotion = emotion;
        self
    }

    pub fn with_credibility(mut self, c: f64) -> Self {
        self.credibility = c;
        self
    }

    pub fn with_susceptibility(mut self, s: f64) -> Self {
        self.susceptibility = s;
        self
    }

    /// Emotion used as the model input: the pre-diffusion state when recorded.
    pub fn feature_emotion(&self) -> EmotionLabel {
        self.initial_emotion.unwrap_or(self.emotion)
    }

    fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.credibility) {
            return Err(format!("credibility {} outside [0,1]", self.credibility));
        }
        if !(0.0..=1.0).contains(&self.susceptibility) {
            return Err(format!("susceptibility {} outside [0,1]", self.susceptibility));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Reply,
    Comment,
    Mention,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::Reply, EdgeKind::Comment, EdgeKind::Mention];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Reply => "reply",
            EdgeKind::Comment => "comment",
            EdgeKind::Mention => "mention",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub kind: EdgeKind,
    #[serde(default = "default_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_length: Option<u32>,
    /// Sentiment label of the interaction text, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<EmotionLabel>,
}

fn default_weight() -> f64 {
    1.0
}

impl Edge {
    pub fn new(source: impl Into<NodeId>, target: impl Into<NodeId>, kind: EdgeKind) -> Self {
        Edge {
            source: source.into(),
            target: target.into(),
            kind,
            weight: 1.0,
            depth: None,
            text_length: None,
            label: None,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_label(mut self, label: EmotionLabel) -> Self {
        self.label = Some(label);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Synthetic,
    LlmSim,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub schema_version: u32,
    /// Free-form provenance block (tool version, config echo).
    pub annotations: Option<serde_json::Value>,
}

/// Node/edge container. Nodes are kept ordered by id; edges keep insertion
/// order and may repeat (multigraph). Undirected edges are stored once with
/// `source < target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    nodes: BTreeMap<NodeId, NodeState>,
    edges: Vec<Edge>,
    pub meta: GraphMeta,
}

impl Graph {
    pub fn new(directed: bool, provenance: Provenance) -> Self {
        Graph {
            directed,
            nodes: BTreeMap::new(),
            edges: Vec::new(),
            meta: GraphMeta { provenance, seed: None, schema_version: SCHEMA_VERSION, annotations: None },
        }
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_node(&mut self, node: NodeState) -> Result<(), GraphError> {
        node.validate().map_err(|m| GraphError::Argument(format!("node {}: {m}", node.id)))?;
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::Argument(format!("duplicate node id {}", node.id)));
        }
        self.nodes.insert(node.id, node);
        Ok(())
    }

    pub fn add_edge(&mut self, mut edge: Edge) -> Result<(), GraphError> {
        if edge.source == edge.target {
            return Err(GraphError::Argument(format!("self-loop on node {}", edge.source)));
        }
        if !edge.weight.is_finite() || edge.weight <= 0.0 {
            return Err(GraphError::Argument(format!(
                "edge {}->{} has non-positive weight {}",
                edge.source, edge.target, edge.weight
            )));
        }
        for end in [edge.source, edge.target] {
            if !self.nodes.contains_key(&end) {
                return Err(GraphError::Argument(format!("edge endpoint {end} is not a node")));
            }
        }
        if !self.directed && edge.source > edge.target {
            std::mem::swap(&mut edge.source, &mut edge.target);
        }
        self.edges.push(edge);
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.nodes.get(&id)
    }

    /// Mutable access for attribute updates; ids cannot be changed through it.
    pub fn update_node<F: FnOnce(&mut NodeState)>(&mut self, id: NodeId, f: F) -> Result<(), GraphError> {
        let node = self.nodes.get_mut(&id).ok_or_else(|| GraphError::Argument(format!("unknown node {id}")))?;
        f(node);
        node.id = id;
        node.validate().map_err(|m| GraphError::Argument(format!("node {id}: {m}")))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeState> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.keys().copied().collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense index of every node (position in ascending id order).
    pub fn index(&self) -> NodeIndex {
        NodeIndex::new(self)
    }

    /// Neighbour lists over dense indices. Undirected graphs list both
    /// endpoints; directed graphs list out-neighbours only. Each list is
    /// sorted and carries the first edge (insertion order) joining the pair.
    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self, false)
    }

    /// Neighbour lists of the undirected projection (multi-edges collapsed).
    pub fn undirected_adjacency(&self) -> Adjacency {
        Adjacency::new(self, true)
    }

    /// Total degree (in + out, multi-edges counted) per node, in id order.
    pub fn degrees(&self) -> Vec<usize> {
        let index = self.index();
        let mut deg = vec![0usize; self.node_count()];
        for e in &self.edges {
            deg[index.of(e.source)] += 1;
            deg[index.of(e.target)] += 1;
        }
        deg
    }
}

/// Maps node ids to dense positions `0..n` in ascending id order.
#[derive(Debug, Clone)]
pub struct NodeIndex {
    ids: Vec<NodeId>,
    positions: std::collections::HashMap<NodeId, usize>,
}

impl NodeIndex {
    fn new(graph: &Graph) -> Self {
        let ids = graph.node_ids();
        let positions = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        NodeIndex { ids, positions }
    }

    /// Panics on an unknown id; graph invariants guarantee edge endpoints exist.
    pub fn of(&self, id: NodeId) -> usize {
        self.positions[&id]
    }

    pub fn get(&self, id: NodeId) -> Option<usize> {
        self.positions.get(&id).copied()
    }

    pub fn id(&self, pos: usize) -> NodeId {
        self.ids[pos]
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Adjacency {
    /// `(neighbour position, index into graph.edges())`, sorted by neighbour.
    lists: Vec<Vec<(usize, usize)>>,
}

impl Adjacency {
    fn new(graph: &Graph, undirected: bool) -> Self {
        let index = graph.index();
        let mut lists: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); graph.node_count()];
        for (ei, e) in graph.edges.iter().enumerate() {
            let (s, t) = (index.of(e.source), index.of(e.target));
            lists[s].entry(t).or_insert(ei);
            if undirected || !graph.directed {
                lists[t].entry(s).or_insert(ei);
            }
        }
        Adjacency { lists: lists.into_iter().map(|m| m.into_iter().collect()).collect() }
    }

    pub fn neighbors(&self, pos: usize) -> &[(usize, usize)] {
        &self.lists[pos]
    }

    pub fn degree(&self, pos: usize) -> usize {
        self.lists[pos].len()
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emotion_encoding_is_a_bijection() {
        for label in EmotionLabel::ALL {
            assert_eq!(EmotionLabel::from_value(label.value()), Some(label));
            assert_eq!(EmotionLabel::from_index(label.index()), Some(label));
            let json = serde_json::to_string(&label).unwrap();
            assert_eq!(serde_json::from_str::<EmotionLabel>(&json).unwrap(), label);
            assert_eq!(label.as_str().parse::<EmotionLabel>().unwrap(), label);
        }
        assert_eq!(EmotionLabel::from_value(0.5), None);
    }

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        let mut g = Graph::new(true, Provenance::Synthetic);
        g.add_node(NodeState::new(0)).unwrap();
        g.add_node(NodeState::new(1)).unwrap();
        assert!(g.add_edge(Edge::new(0, 0, EdgeKind::Reply)).is_err());
        assert!(g.add_edge(Edge::new(0, 1, EdgeKind::Reply).with_weight(0.0)).is_err());
        assert!(g.add_edge(Edge::new(0, 2, EdgeKind::Reply)).is_err());
        g.add_edge(Edge::new(0, 1, EdgeKind::Reply)).unwrap();
        g.add_edge(Edge::new(0, 1, EdgeKind::Reply)).unwrap();
        assert_eq!(g.edge_count(), 2, "multi-edges are preserved");
    }

    #[test]
    fn rejects_out_of_range_attributes() {
        let mut g = Graph::new(false, Provenance::Synthetic);
        assert!(g.add_node(NodeState::new(0).with_credibility(1.5)).is_err());
        assert!(g.add_node(NodeState::new(0).with_susceptibility(-0.1)).is_err());
        g.add_node(NodeState::new(0)).unwrap();
        assert!(g.add_node(NodeState::new(0)).is_err());
    }

    #[test]
    fn undirected_edges_are_canonical() {
        let mut g = Graph::new(false, Provenance::Synthetic);
        g.add_node(NodeState::new(3)).unwrap();
        g.add_node(NodeState::new(7)).unwrap();
        g.add_edge(Edge::new(7, 3, EdgeKind::Mention)).unwrap();
        assert_eq!((g.edges()[0].source, g.edges()[0].target), (NodeId(3), NodeId(7)));
        let adj = g.adjacency();
        assert_eq!(adj.neighbors(0), &[(1, 0)]);
        assert_eq!(adj.neighbors(1), &[(0, 0)]);
    }
}
