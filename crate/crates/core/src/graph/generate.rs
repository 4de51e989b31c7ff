use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Edge, EdgeKind, EmotionLabel, Graph, GraphError, NodeState, Provenance};
use crate::rng::rng_from_seed;

/// Erdős–Rényi G(n, p) over nodes `0..n`. Each unordered pair is visited
/// once in lexicographic order; on success the edge kind is drawn uniformly
/// from reply/comment/mention.
pub fn generate_er_graph(n: usize, p_edge: f64, rng_seed: u64) -> Result<Graph, GraphError> {
    if n < 1 {
        return Err(GraphError::Argument("node count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p_edge) {
        return Err(GraphError::Argument(format!("edge probability {p_edge} outside [0,1]")));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut g = Graph::new(false, Provenance::Synthetic);
    g.meta.seed = Some(rng_seed);
    for i in 0..n {
        g.add_node(NodeState::new(i as u32))?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p_edge) {
                let kind = EdgeKind::ALL[rng.random_range(0..EdgeKind::ALL.len())];
                g.add_edge(Edge::new(i as u32, j as u32, kind))?;
            }
        }
    }
    Ok(g)
}

/// `num_chains` disjoint directed reply paths of `chain_len` users each.
/// Chain `c` owns ids `c*chain_len .. (c+1)*chain_len`.
pub fn generate_chain_graphs(num_chains: usize, chain_len: usize, rng_seed: u64) -> Result<Graph, GraphError> {
    if num_chains < 1 {
        return Err(GraphError::Argument("need at least one chain".into()));
    }
    if chain_len < 2 {
        return Err(GraphError::Argument(format!("chain length {chain_len} < 2")));
    }
    let mut g = Graph::new(true, Provenance::LlmSim);
    g.meta.seed = Some(rng_seed);
    let total = num_chains * chain_len;
    for id in 0..total {
        g.add_node(NodeState::new(id as u32))?;
    }
    for c in 0..num_chains {
        let base = c * chain_len;
        for k in 0..chain_len - 1 {
            let mut e = Edge::new((base + k) as u32, (base + k + 1) as u32, EdgeKind::Reply);
            e.depth = Some(k as u32 + 1);
            g.add_edge(e)?;
        }
    }
    Ok(g)
}

/// Relative weights for the initial emotion draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionDistribution {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

impl EmotionDistribution {
    pub const UNIFORM: EmotionDistribution = EmotionDistribution { positive: 1.0, neutral: 1.0, negative: 1.0 };

    pub fn only(label: EmotionLabel) -> Self {
        let mut d = EmotionDistribution { positive: 0.0, neutral: 0.0, negative: 0.0 };
        match label {
            EmotionLabel::Positive => d.positive = 1.0,
            EmotionLabel::Neutral => d.neutral = 1.0,
            EmotionLabel::Negative => d.negative = 1.0,
        }
        d
    }

    fn weights(&self) -> [f64; 3] {
        [self.positive, self.neutral, self.negative]
    }

    fn sampler(&self) -> Result<WeightedIndex<f64>, GraphError> {
        let w = self.weights();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(GraphError::Argument(format!("emotion weights must be finite and nonnegative: {w:?}")));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(GraphError::Argument("emotion weights are all zero".into()));
        }
        WeightedIndex::new(w).map_err(|e| GraphError::Argument(e.to_string()))
    }
}

impl Default for EmotionDistribution {
    fn default() -> Self {
        Self::UNIFORM
    }
}

/// Assigns emotion, credibility and susceptibility to every node in id
/// order. Per node the draws are: emotion, credibility, susceptibility.
pub fn init_node_attributes(
    mut graph: Graph,
    emotion_dist: &EmotionDistribution,
    rng_seed: u64,
) -> Result<Graph, GraphError> {
    let sampler = emotion_dist.sampler()?;
    let mut rng = rng_from_seed(rng_seed);
    for id in graph.node_ids() {
        let emotion = EmotionLabel::ALL[sampler.sample(&mut rng)];
        let credibility: f64 = rng.random();
        let susceptibility: f64 = rng.random();
        graph.update_node(id, |n| {
            n.emotion = emotion;
            n.credibility = credibility;
            n.susceptibility = susceptibility;
        })?;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degree_stats, weakly_connected_components};

    #[test]
    fn er_extremes() {
        let g = generate_er_graph(10, 0.0, 1).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (10, 0));
        let g = generate_er_graph(10, 1.0, 1).unwrap();
        assert_eq!(g.edge_count(), 45);
        assert_eq!(degree_stats(&g).average_degree, 9.0);
    }

    #[test]
    fn er_rejects_bad_probability() {
        assert!(generate_er_graph(10, 1.5, 0).is_err());
        assert!(generate_er_graph(10, -0.1, 0).is_err());
        assert!(generate_er_graph(0, 0.5, 0).is_err());
    }

    #[test]
    fn er_mean_edge_count_matches_binomial_mean() {
        // Binomial(45, 0.5): mean 22.5, sd of the 1000-run mean ~0.106.
        let mean =
            (0..1000u64).map(|s| generate_er_graph(10, 0.5, s).unwrap().edge_count() as f64).sum::<f64>() / 1000.0;
        let expected = 45.0 * 0.5;
        assert!((mean - expected).abs() <= 2.0, "mean {mean}");
    }

    #[test]
    fn er_is_deterministic() {
        assert_eq!(generate_er_graph(12, 0.4, 9).unwrap(), generate_er_graph(12, 0.4, 9).unwrap());
    }

    #[test]
    fn chain_counts() {
        let g = generate_chain_graphs(100, 4, 0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (400, 300));
        let g = generate_chain_graphs(1, 2, 0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        let g = generate_chain_graphs(3, 5, 0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (15, 12));
        assert_eq!(weakly_connected_components(&g), 3);
        assert!(generate_chain_graphs(3, 1, 0).is_err());
    }

    #[test]
    fn degenerate_distribution_assigns_one_label() {
        let g = generate_er_graph(20, 0.3, 5).unwrap();
        let g = init_node_attributes(g, &EmotionDistribution::only(EmotionLabel::Positive), 3).unwrap();
        assert!(g.nodes().all(|n| n.emotion == EmotionLabel::Positive));
        assert!(g.nodes().all(|n| (0.0..=1.0).contains(&n.credibility) && (0.0..=1.0).contains(&n.susceptibility)));
    }

    #[test]
    fn attribute_init_is_deterministic() {
        let g = generate_er_graph(20, 0.3, 5).unwrap();
        let a = init_node_attributes(g.clone(), &EmotionDistribution::UNIFORM, 77).unwrap();
        let b = init_node_attributes(g, &EmotionDistribution::UNIFORM, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_weights_rejected_even_on_empty_graph() {
        let zero = EmotionDistribution { positive: 0.0, neutral: 0.0, negative: 0.0 };
        let g = generate_er_graph(3, 0.5, 1).unwrap();
        assert!(init_node_attributes(g, &zero, 1).is_err());
        let empty = Graph::new(false, Provenance::Synthetic);
        assert!(init_node_attributes(empty.clone(), &zero, 1).is_err());
        assert_eq!(init_node_attributes(empty.clone(), &EmotionDistribution::UNIFORM, 1).unwrap(), empty);
    }

    /// Binomial tail oracle: P(|X/n - 1/3| > 0.03) for X ~ Bin(3000, 1/3),
    /// computed exactly by summing the pmf in log space.
    fn binomial_two_sided_tail(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
        let ln_fact = |k: u64| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        let lnf_n = ln_fact(n);
        let mut tail = 0.0;
        let mut lnf_k = 0.0;
        for k in 0..=n {
            if k > 0 {
                lnf_k += (k as f64).ln();
            }
            if k < lo || k > hi {
                let lnf_nk = ln_fact(n - k);
                tail += (lnf_n - lnf_k - lnf_nk + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp();
            }
        }
        tail
    }

    #[test]
    fn uniform_distribution_label_shares() {
        let n = 3000u64;
        // 0.03 band: counts 910..=1090 are inside.
        let tail = binomial_two_sided_tail(n, 1.0 / 3.0, 910, 1090);
        assert!(tail < 1e-3, "oracle tail {tail}");
        let mut g = Graph::new(false, Provenance::Synthetic);
        for i in 0..n as u32 {
            g.add_node(NodeState::new(i)).unwrap();
        }
        let g = init_node_attributes(g, &EmotionDistribution::UNIFORM, 2024).unwrap();
        for label in EmotionLabel::ALL {
            let share = g.nodes().filter(|x| x.emotion == label).count() as f64 / n as f64;
            assert!((share - 1.0 / 3.0).abs() <= 0.03, "{label}: {share}");
        }
    }
}
