//! Ready-made experiment setups: the neutral-seed positivity cascade, the
//! expanded chain-shaped simulated graph, and the collapsed-label training
//! case built from the cascade.

use serde::{Deserialize, Serialize};

use crate::contagion::{
    run_llm_diffusion_from, ContagionError, LlmRunConfig, LlmTrace, PersonaProvider, ScriptEntry, ScriptedProvider,
    TonePolicy,
};
use crate::graph::{
    generate_chain_graphs, init_node_attributes, Edge, EdgeKind, EmotionDistribution, EmotionLabel, Graph, GraphError,
    NodeId, NodeState, Provenance,
};
use crate::learn::{train, LearnError, TrainConfig, TrainReport, TrainedModel};

pub const POSITIVITY_SEED: NodeId = NodeId(31);
pub const POSITIVITY_FANOUT: u32 = 31;

const ROUND_ONE_POSITIVE: [&str; 26] = [
    "Thanks for posting this, really helpful.",
    "Great summary, I appreciate it.",
    "This is good news for everyone.",
    "Love the clear explanation here.",
    "Nice, glad someone shared this.",
    "What a great idea, thank you.",
    "Happy to see this discussed calmly.",
    "Excellent point, well said.",
    "I agree, this is a positive step.",
    "Wonderful, thanks for the update.",
    "Helpful context, much appreciated.",
    "Good to know, thanks!",
    "That sounds like a smart plan.",
    "Really interesting read, thank you.",
    "Glad this got attention, great work.",
    "I like this approach a lot.",
    "Fantastic news, thanks for sharing.",
    "Such a kind and thoughtful post.",
    "Great to see progress on this.",
    "This made my day, thanks.",
    "Very useful, I appreciate the effort.",
    "Nice work pulling this together.",
    "Encouraging news, well done.",
    "Thanks, this is a fair and balanced take.",
    "Good point, I hope it works out.",
    "Best explanation I have seen so far.",
];

const ROUND_ONE_NEUTRAL: [&str; 5] = [
    "The article was posted on Monday.",
    "Here is the link to the full report.",
    "The vote is scheduled for next week.",
    "They said the numbers will be updated.",
    "The meeting notes are in the thread.",
];

const ROUND_TWO_REPLY: &str = "Thanks, glad to hear that, great point.";

/// Neighbours of the seed that receive a neutral scripted reply.
fn neutral_slot(i: u32) -> Option<usize> {
    (i % 6 == 5).then_some((i / 6) as usize)
}

/// Neutral seed 31 with neighbours 0..=30; neighbour `i` has one further
/// neighbour `32 + i`. Every node starts neutral.
pub fn positivity_graph() -> Result<Graph, GraphError> {
    let mut g = Graph::new(false, Provenance::Synthetic);
    for id in 0..(2 * POSITIVITY_FANOUT + 1) {
        g.add_node(NodeState::new(id))?;
    }
    for i in 0..POSITIVITY_FANOUT {
        g.add_edge(Edge::new(POSITIVITY_SEED, NodeId(i), EdgeKind::Reply))?;
        g.add_edge(Edge::new(NodeId(i), NodeId(POSITIVITY_FANOUT + 1 + i), EdgeKind::Reply))?;
    }
    Ok(g)
}

/// Round 1: one reply per seed neighbour, 26 positive and 5 neutral.
/// Round 2: a positive reply for every edge.
pub fn positivity_script() -> Vec<ScriptEntry> {
    let mut positive = ROUND_ONE_POSITIVE.iter();
    let mut entries: Vec<ScriptEntry> = (0..POSITIVITY_FANOUT)
        .map(|i| ScriptEntry {
            round: Some(1),
            source: Some(POSITIVITY_SEED),
            target: Some(NodeId(i)),
            prompt_hash: None,
            reply: match neutral_slot(i) {
                Some(k) => ROUND_ONE_NEUTRAL[k].to_string(),
                None => positive.next().expect("26 positive replies").to_string(),
            },
        })
        .collect();
    entries.push(ScriptEntry {
        round: Some(2),
        source: None,
        target: None,
        prompt_hash: None,
        reply: ROUND_TWO_REPLY.into(),
    });
    entries
}

pub fn positivity_script_jsonl() -> String {
    positivity_script().iter().map(|e| serde_json::to_string(e).expect("entry serializes") + "\n").collect()
}

/// Two rounds from the neutral seed with neutral prompting throughout.
pub fn run_positivity_cascade(rng_seed: u64) -> Result<LlmTrace, ContagionError> {
    let provider = ScriptedProvider::from_entries(&positivity_script())?;
    let config =
        LlmRunConfig { rounds: 2, tone_policy: TonePolicy::Fixed(EmotionLabel::Neutral), ..Default::default() };
    run_llm_diffusion_from(&positivity_graph()?, &[POSITIVITY_SEED], &config, &provider, rng_seed)
}

/// Parameters of the expanded simulated graph: disjoint reply chains whose
/// heads seed a persona-driven cascade down each chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatedGraphRecipe {
    pub chains: usize,
    pub chain_len: usize,
    pub emotion_dist: EmotionDistribution,
    pub attribute_seed: u64,
    pub diffusion_seed: u64,
    pub persona: PersonaProvider,
}

impl Default for SimulatedGraphRecipe {
    fn default() -> Self {
        SimulatedGraphRecipe {
            chains: 100,
            chain_len: 5,
            emotion_dist: EmotionDistribution::UNIFORM,
            attribute_seed: 2024,
            diffusion_seed: 5,
            persona: PersonaProvider { persona_weight: 0.8, positivity_bias: 0.2 },
        }
    }
}

impl SimulatedGraphRecipe {
    pub fn run(&self) -> Result<LlmTrace, ContagionError> {
        let chains = generate_chain_graphs(self.chains, self.chain_len, self.attribute_seed)?;
        let graph = init_node_attributes(chains, &self.emotion_dist, self.attribute_seed)?;
        let heads: Vec<NodeId> = (0..self.chains).map(|c| NodeId((c * self.chain_len) as u32)).collect();
        let config = LlmRunConfig { rounds: self.chain_len as u32 - 1, ..Default::default() };
        run_llm_diffusion_from(&graph, &heads, &config, &self.persona, self.diffusion_seed)
    }
}

/// Three 20-node rings, one per emotion. Labels are a function of the
/// one-hot features, so any working classifier separates them.
pub fn planted_label_graph() -> Graph {
    let mut g = Graph::new(false, Provenance::Synthetic);
    for i in 0..60u32 {
        let label = EmotionLabel::ALL[(i / 20) as usize];
        g.add_node(NodeState::new(i).with_emotion(label).with_credibility(f64::from(i % 7) / 7.0)).expect("fresh ids");
    }
    for c in 0..3u32 {
        for k in 0..20u32 {
            g.add_edge(Edge::new(c * 20 + k, c * 20 + (k + 1) % 20, EdgeKind::Reply)).expect("known endpoints");
        }
    }
    g
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Contagion(#[from] ContagionError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Simulated graph from `recipe`, then a GCN trained on it.
pub fn train_on_simulated(
    recipe: &SimulatedGraphRecipe,
    config: &TrainConfig,
) -> Result<(LlmTrace, TrainReport, TrainedModel), ScenarioError> {
    let trace = recipe.run()?;
    let (report, model) = train(&trace.graph, config)?;
    Ok((trace, report, model))
}

/// GCN trained on the positivity cascade's output graph, where the
/// neutral class is a handful of nodes with the same features as the rest.
pub fn neutral_collapse(config: &TrainConfig) -> Result<(TrainReport, TrainedModel), ScenarioError> {
    let trace = run_positivity_cascade(0)?;
    Ok(train(&trace.graph, config)?)
}
