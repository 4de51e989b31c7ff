//! Round-based emotion propagation with three strategies (fixed-probability
//! random, credibility/susceptibility product, and an enhanced independent
//! cascade), the composite reward, and batch experiments.

mod batch;
mod reward;
mod trace;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Adjacency, EdgeKind, EmotionLabel, Graph, GraphError, NodeId, NodeIndex};
use crate::rng::{rng_from_seed, SimRng};

pub use batch::{batch_experiment, render_table, BatchConfig, BatchSummary, GeneratorConfig, StrategySummary};
pub use reward::{reward, RewardBreakdown, RewardWeights};
pub use trace::{read_trace_jsonl, write_trace_jsonl, DiffusionTrace, TraceRecord};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("trace parse error on line {line}: {message}")]
    TraceParse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Theory,
    Eic,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Theory, Strategy::Eic];

    pub fn display_name(self) -> &'static str {
        match self {
            Strategy::Random => "Random",
            Strategy::Theory => "Theory",
            Strategy::Eic => "eIC",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Random => "random",
            Strategy::Theory => "theory",
            Strategy::Eic => "eic",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Strategy::Random),
            "theory" => Ok(Strategy::Theory),
            "eic" => Ok(Strategy::Eic),
            other => Err(SimError::Argument(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    pub strategy: Strategy,
    /// Per-attempt probability of the random strategy.
    pub p_fixed: f64,
    /// Emotional intensity of a neutral sender (polar emotions are 1.0).
    pub neutral_intensity: f64,
    pub base_p: f64,
    /// Edge-kind multipliers for eIC. Kinds missing from the map use 1.0 and
    /// log a warning in the trace.
    pub kind_weights: BTreeMap<EdgeKind, f64>,
    pub reward_weights: RewardWeights,
    /// Rounds a node keeps transmitting after activation; `None` = forever.
    pub recovery_rounds: Option<u32>,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            strategy: Strategy::Random,
            p_fixed: 0.3,
            neutral_intensity: 0.5,
            base_p: 0.08,
            kind_weights: BTreeMap::from([(EdgeKind::Reply, 1.0), (EdgeKind::Comment, 1.0), (EdgeKind::Mention, 0.8)]),
            reward_weights: RewardWeights::default(),
            recovery_rounds: None,
        }
    }
}

impl StrategyParams {
    pub fn for_strategy(strategy: Strategy) -> Self {
        StrategyParams { strategy, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, p) in
            [("p_fixed", self.p_fixed), ("neutral_intensity", self.neutral_intensity), ("base_p", self.base_p)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Argument(format!("{name} = {p} outside [0,1]")));
            }
        }
        if let Some((k, w)) = self.kind_weights.iter().find(|(_, w)| !w.is_finite() || **w <= 0.0) {
            return Err(SimError::Argument(format!("kind weight for {k} must be positive, got {w}")));
        }
        if self.recovery_rounds == Some(0) {
            return Err(SimError::Argument("recovery_rounds must be at least 1 when set".into()));
        }
        Ok(())
    }

    fn intensity(&self, e: EmotionLabel) -> f64 {
        match e {
            EmotionLabel::Neutral => self.neutral_intensity,
            EmotionLabel::Positive | EmotionLabel::Negative => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationEvent {
    pub round: u32,
    pub source: NodeId,
    pub target: NodeId,
    pub emotion_transmitted: EmotionLabel,
    pub probability_used: f64,
    pub success: bool,
    /// Receiver credibility, carried so the reward can be recomputed from
    /// the trace alone.
    pub receiver_credibility: f64,
}

/// Mutable per-run state over an immutable graph.
#[derive(Debug, Clone)]
pub struct SimState<'g> {
    graph: &'g Graph,
    index: NodeIndex,
    adjacency: Adjacency,
    emotions: Vec<EmotionLabel>,
    activation: Vec<Option<u32>>,
    round: u32,
    attempted: HashSet<(usize, usize)>,
    recovery_rounds: Option<u32>,
    warnings: Vec<String>,
}

impl<'g> SimState<'g> {
    /// Seed is active at round 0 with its own emotion.
    pub fn new(graph: &'g Graph, seed_node: NodeId) -> Result<Self, SimError> {
        let index = graph.index();
        let seed = index
            .get(seed_node)
            .ok_or_else(|| SimError::Argument(format!("seed node {seed_node} is not in the graph")))?;
        let mut activation = vec![None; graph.node_count()];
        activation[seed] = Some(0);
        Ok(SimState {
            graph,
            adjacency: graph.adjacency(),
            emotions: graph.nodes().map(|n| n.emotion).collect(),
            index,
            activation,
            round: 0,
            attempted: HashSet::new(),
            recovery_rounds: None,
            warnings: Vec::new(),
        })
    }

    pub fn with_recovery(mut self, rounds: Option<u32>) -> Self {
        self.recovery_rounds = rounds;
        self
    }

    /// Moves to the next round; steps act on the current round number.
    pub fn advance(&mut self) -> u32 {
        self.round += 1;
        self.round
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn active_count(&self) -> usize {
        self.activation.iter().filter(|a| a.is_some()).count()
    }

    pub fn activation_round(&self, id: NodeId) -> Option<u32> {
        self.index.get(id).and_then(|p| self.activation[p])
    }

    pub fn emotion(&self, id: NodeId) -> Option<EmotionLabel> {
        self.index.get(id).map(|p| self.emotions[p])
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Nodes that transmit in the current round: activated earlier and not
    /// yet recovered. Ascending id order.
    fn senders(&self) -> Vec<usize> {
        (0..self.activation.len())
            .filter(|&p| match self.activation[p] {
                Some(a) if a < self.round => self.recovery_rounds.is_none_or(|k| self.round - a <= k),
                _ => false,
            })
            .collect()
    }

    /// Runs one round of attempts. `probability` returns the attempt
    /// probability for `(sender, receiver, edge index)`, or `None` to skip
    /// the pair.
    fn attempt_round<F>(&mut self, rng: &mut SimRng, mut probability: F) -> Vec<PropagationEvent>
    where
        F: FnMut(&mut Self, usize, usize, usize) -> Option<f64>,
    {
        let round = self.round;
        let mut events = Vec::new();
        for u in self.senders() {
            let neighbors = self.adjacency.neighbors(u).to_vec();
            for (v, edge_idx) in neighbors {
                if self.activation[v].is_some() {
                    continue;
                }
                let Some(p) = probability(self, u, v, edge_idx) else {
                    continue;
                };
                let p = p.clamp(0.0, 1.0);
                let success = rng.random_bool(p);
                let emotion = self.emotions[u];
                if success {
                    self.activation[v] = Some(round);
                    self.emotions[v] = emotion;
                }
                events.push(PropagationEvent {
                    round,
                    source: self.index.id(u),
                    target: self.index.id(v),
                    emotion_transmitted: emotion,
                    probability_used: p,
                    success,
                    receiver_credibility: self.graph.node(self.index.id(v)).map_or(0.0, |n| n.credibility),
                });
            }
        }
        events
    }
}

/// Every active sender tries every inactive neighbour with `p_fixed`.
pub fn step_random(state: &mut SimState<'_>, params: &StrategyParams, rng: &mut SimRng) -> Vec<PropagationEvent> {
    let p = params.p_fixed;
    state.attempt_round(rng, |_, _, _, _| Some(p))
}

/// Attempt probability `c_u · I(e_u) · s_v`.
pub fn step_theory(state: &mut SimState<'_>, params: &StrategyParams, rng: &mut SimRng) -> Vec<PropagationEvent> {
    state.attempt_round(rng, |st, u, v, _| {
        let sender = st.graph.node(st.index.id(u))?;
        let receiver = st.graph.node(st.index.id(v))?;
        Some(sender.credibility * params.intensity(st.emotions[u]) * receiver.susceptibility)
    })
}

/// Attempt probability `min(1, base_p · w(kind) · (1 + hub(u)))`, at most one
/// attempt per ordered pair over the whole run.
pub fn step_eic(
    state: &mut SimState<'_>,
    params: &StrategyParams,
    rng: &mut SimRng,
    hub_scores: &BTreeMap<NodeId, f64>,
) -> Vec<PropagationEvent> {
    state.attempt_round(rng, |st, u, v, edge_idx| {
        if !st.attempted.insert((u, v)) {
            return None;
        }
        let kind = st.graph.edges()[edge_idx].kind;
        let weight = match params.kind_weights.get(&kind) {
            Some(w) => *w,
            None => {
                let msg = format!("no weight for edge kind '{kind}', using 1.0");
                if !st.warnings.contains(&msg) {
                    st.warnings.push(msg);
                }
                1.0
            }
        };
        let hub = hub_scores.get(&st.index.id(u)).copied().unwrap_or(0.0);
        Some((params.base_p * weight * (1.0 + hub)).min(1.0))
    })
}

/// Runs synchronous rounds from `seed_node` until a round activates nobody
/// or `max_rounds` is reached.
pub fn run_simulation(
    graph: &Graph,
    params: &StrategyParams,
    seed_node: NodeId,
    max_rounds: u32,
    rng_seed: u64,
) -> Result<DiffusionTrace, SimError> {
    params.validate()?;
    if max_rounds < 1 {
        return Err(SimError::Argument("max_rounds must be at least 1".into()));
    }
    let mut state = SimState::new(graph, seed_node)?.with_recovery(params.recovery_rounds);
    let hubs = match params.strategy {
        Strategy::Eic => Some(crate::graph::hub_scores(graph)?),
        _ => None,
    };
    let mut rng = rng_from_seed(rng_seed);
    let mut events = Vec::new();
    let mut round_sizes = vec![state.active_count()];
    for _ in 0..max_rounds {
        state.advance();
        let step = match params.strategy {
            Strategy::Random => step_random(&mut state, params, &mut rng),
            Strategy::Theory => step_theory(&mut state, params, &mut rng),
            Strategy::Eic => step_eic(&mut state, params, &mut rng, hubs.as_ref().expect("computed for eIC")),
        };
        let progressed = step.iter().any(|e| e.success);
        events.extend(step);
        round_sizes.push(state.active_count());
        if !progressed {
            break;
        }
    }
    let mut trace = DiffusionTrace {
        strategy: params.strategy,
        seed_node,
        rng_seed,
        graph_seed: graph.meta.seed,
        events,
        round_sizes,
        reward: RewardBreakdown::default(),
        reward_weights: params.reward_weights,
        warnings: state.warnings.clone(),
    };
    trace.reward = reward(&trace);
    Ok(trace)
}
