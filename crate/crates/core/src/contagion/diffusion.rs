use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::prompt::build_prompt;
use super::provider::{GenerationProvider, GenerationRequest, ProviderError};
use super::ContagionError;
use crate::graph::{Edge, EdgeKind, EmotionLabel, Graph, NodeId, NodeState, Provenance};
use crate::rng::derive_seed;
use crate::sentiment::{classify_sentiment, SentimentScore};

/// Which tone each prompt requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "tone")]
pub enum TonePolicy {
    /// The sender's current label (the seed's emotion in round 1).
    #[default]
    FollowSender,
    /// The same tone in every round.
    Fixed(EmotionLabel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmRunConfig {
    pub rounds: u32,
    pub tone_policy: TonePolicy,
    pub max_tokens: u32,
    pub temperature: f64,
    /// Upper bound on concurrent provider calls within a round.
    pub max_in_flight: usize,
}

impl Default for LlmRunConfig {
    fn default() -> Self {
        LlmRunConfig {
            rounds: 2,
            tone_policy: TonePolicy::FollowSender,
            max_tokens: 96,
            temperature: 0.0,
            max_in_flight: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplyRecord {
    pub round: u32,
    pub source: NodeId,
    pub target: NodeId,
    pub source_emotion: EmotionLabel,
    pub tone: EmotionLabel,
    pub prompt_hash: String,
    pub reply: String,
    pub score: SentimentScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFailure {
    pub round: u32,
    pub source: NodeId,
    pub target: NodeId,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmTrace {
    pub seeds: Vec<NodeId>,
    pub seed_emotions: Vec<EmotionLabel>,
    pub rng_seed: u64,
    pub provider: String,
    pub config: LlmRunConfig,
    pub records: Vec<ReplyRecord>,
    pub failures: Vec<EdgeFailure>,
    pub diagnostics: Vec<String>,
    /// Activated nodes and the reply edges that activated them.
    pub graph: Graph,
}

impl LlmTrace {
    pub fn rounds_completed(&self) -> u32 {
        self.records.iter().map(|r| r.round).max().unwrap_or(0)
    }

    pub fn records_in_round(&self, round: u32) -> impl Iterator<Item = &ReplyRecord> {
        self.records.iter().filter(move |r| r.round == round)
    }
}

/// Single-seed diffusion with default generation settings.
pub fn run_llm_diffusion(
    graph: &Graph,
    seed_node: NodeId,
    rounds: u32,
    provider: &dyn GenerationProvider,
    tone_policy: TonePolicy,
    rng_seed: u64,
) -> Result<LlmTrace, ContagionError> {
    let config = LlmRunConfig { rounds, tone_policy, ..LlmRunConfig::default() };
    run_llm_diffusion_from(graph, &[seed_node], &config, provider, rng_seed)
}

struct Pending {
    source: NodeId,
    target: NodeId,
    kind: EdgeKind,
}

/// Breadth-first reply cascade from `seeds`. In round `r` every node
/// activated in round `r - 1` replies to each still inactive neighbour
/// (out-neighbour on directed graphs); a neighbour reachable from several
/// senders is claimed by the smallest sender id. Each reply is classified
/// and its label becomes the receiver's emotion.
pub fn run_llm_diffusion_from(
    graph: &Graph,
    seeds: &[NodeId],
    config: &LlmRunConfig,
    provider: &dyn GenerationProvider,
    rng_seed: u64,
) -> Result<LlmTrace, ContagionError> {
    if config.rounds < 1 {
        return Err(ContagionError::Argument("rounds must be at least 1".into()));
    }
    if seeds.is_empty() {
        return Err(ContagionError::Argument("at least one seed node is required".into()));
    }
    if config.max_in_flight < 1 {
        return Err(ContagionError::Argument("max_in_flight must be at least 1".into()));
    }
    let index = graph.index();
    let adjacency = graph.adjacency();
    let mut state: Vec<NodeState> = graph.nodes().cloned().collect();
    let mut activated: Vec<Option<u32>> = vec![None; state.len()];
    let mut seed_emotions = Vec::with_capacity(seeds.len());
    for s in seeds {
        let pos =
            index.get(*s).ok_or_else(|| ContagionError::Argument(format!("seed node {s} is not in the graph")))?;
        if activated[pos].replace(0).is_some() {
            return Err(ContagionError::Argument(format!("seed node {s} listed twice")));
        }
        seed_emotions.push(state[pos].emotion);
    }

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut diagnostics = Vec::new();
    let mut reply_edges = Vec::new();
    for round in 1..=config.rounds {
        let mut claimed = vec![false; state.len()];
        let mut pending = Vec::new();
        for u in 0..state.len() {
            if activated[u] != Some(round - 1) {
                continue;
            }
            for &(v, ei) in adjacency.neighbors(u) {
                if activated[v].is_none() && !claimed[v] {
                    claimed[v] = true;
                    pending.push(Pending { source: index.id(u), target: index.id(v), kind: graph.edges()[ei].kind });
                }
            }
        }
        if pending.is_empty() {
            break;
        }

        let prompts: Vec<_> = pending
            .iter()
            .map(|p| {
                let (sender, receiver) = (&state[index.of(p.source)], &state[index.of(p.target)]);
                let tone = match config.tone_policy {
                    TonePolicy::FollowSender => sender.emotion,
                    TonePolicy::Fixed(t) => t,
                };
                let mut edge = Edge::new(p.source, p.target, p.kind);
                edge.depth = Some(round);
                build_prompt(sender, receiver, &edge, tone)
            })
            .collect();
        let replies = generate_all(&prompts, config, provider, rng_seed);

        let mut round_failures = 0;
        for ((p, prompt), reply) in pending.iter().zip(&prompts).zip(replies) {
            match reply {
                Ok(text) => {
                    let score = classify_sentiment(&text);
                    let tpos = index.of(p.target);
                    activated[tpos] = Some(round);
                    let receiver = &mut state[tpos];
                    receiver.initial_emotion.get_or_insert(receiver.emotion);
                    receiver.emotion = score.label;
                    let mut edge = Edge::new(p.source, p.target, EdgeKind::Reply).with_label(score.label);
                    edge.depth = Some(round);
                    edge.text_length = Some(text.chars().count() as u32);
                    reply_edges.push(edge);
                    records.push(ReplyRecord {
                        round,
                        source: p.source,
                        target: p.target,
                        source_emotion: state[index.of(p.source)].emotion,
                        tone: prompt.meta.tone,
                        prompt_hash: prompt.hash(),
                        reply: text,
                        score,
                    });
                }
                Err(e) => {
                    round_failures += 1;
                    failures.push(EdgeFailure { round, source: p.source, target: p.target, error: e.to_string() });
                }
            }
        }
        if round_failures == pending.len() {
            diagnostics
                .push(format!("round {round}: all {} generation requests failed; stopping early", pending.len()));
            break;
        }
    }

    let mut out = Graph::new(true, Provenance::LlmSim);
    out.meta.seed = Some(rng_seed);
    for (pos, node) in state.into_iter().enumerate() {
        if let Some(r) = activated[pos] {
            let mut node = node;
            node.initial_emotion.get_or_insert(node.emotion);
            node.activation_round = Some(r);
            node.post_frequency += 1;
            out.add_node(node)?;
        }
    }
    for e in reply_edges {
        out.add_edge(e)?;
    }
    Ok(LlmTrace {
        seeds: seeds.to_vec(),
        seed_emotions,
        rng_seed,
        provider: provider.name().to_string(),
        config: config.clone(),
        records,
        failures,
        diagnostics,
        graph: out,
    })
}

/// Calls the provider for every prompt with at most `max_in_flight`
/// requests outstanding. Results come back in prompt order.
fn generate_all(
    prompts: &[crate::contagion::Prompt],
    config: &LlmRunConfig,
    provider: &dyn GenerationProvider,
    rng_seed: u64,
) -> Vec<Result<String, ProviderError>> {
    let call = |i: usize| {
        let m = prompts[i].meta;
        let seed = derive_seed(rng_seed, &[u64::from(m.round), u64::from(m.source.0), u64::from(m.target.0)]);
        provider.generate(&GenerationRequest {
            prompt: &prompts[i],
            max_tokens: config.max_tokens,
            temperature: config.temperature,
            seed,
        })
    };
    let workers = config.max_in_flight.min(prompts.len());
    if workers <= 1 {
        return (0..prompts.len()).map(call).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<String, ProviderError>>>> = Mutex::new(vec![None; prompts.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= prompts.len() {
                    break;
                }
                let result = call(i);
                slots.lock().expect("no worker panicked")[i] = Some(result);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// One JSONL line of an LLM trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum LlmTraceRecord {
    Reply(ReplyRecord),
    Failure(EdgeFailure),
    Summary(LlmTraceSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmTraceSummary {
    pub seeds: Vec<NodeId>,
    pub seed_emotions: Vec<EmotionLabel>,
    pub rng_seed: u64,
    pub provider: String,
    pub config: LlmRunConfig,
    pub replies: usize,
    pub failures: usize,
    pub rounds_completed: u32,
    /// `(round, [positive, neutral, negative])` reply counts.
    pub label_counts_by_round: Vec<(u32, [usize; 3])>,
    pub diagnostics: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<serde_json::Value>,
}

/// Reply and failure records, then a summary line. The diffusion graph is
/// written separately with the graph serializer.
pub fn write_llm_trace_jsonl(trace: &LlmTrace, annotations: Option<serde_json::Value>) -> String {
    let mut out = String::new();
    let mut push = |r: &LlmTraceRecord| {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    };
    for r in &trace.records {
        push(&LlmTraceRecord::Reply(r.clone()));
    }
    for f in &trace.failures {
        push(&LlmTraceRecord::Failure(f.clone()));
    }
    let mut counts: BTreeMap<u32, [usize; 3]> = BTreeMap::new();
    for r in &trace.records {
        counts.entry(r.round).or_default()[r.score.label.index()] += 1;
    }
    push(&LlmTraceRecord::Summary(LlmTraceSummary {
        seeds: trace.seeds.clone(),
        seed_emotions: trace.seed_emotions.clone(),
        rng_seed: trace.rng_seed,
        provider: trace.provider.clone(),
        config: trace.config.clone(),
        replies: trace.records.len(),
        failures: trace.failures.len(),
        rounds_completed: trace.rounds_completed(),
        label_counts_by_round: counts.into_iter().collect(),
        diagnostics: trace.diagnostics.clone(),
        annotations,
    }));
    out
}

/// Parses a trace file back; `graph` is the diffusion graph stored next to it.
pub fn read_llm_trace_jsonl(text: &str, graph: Graph) -> Result<LlmTrace, ContagionError> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut summary = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LlmTraceRecord = serde_json::from_str(line)
            .map_err(|e| ContagionError::TraceParse { line: i + 1, message: e.to_string() })?;
        match rec {
            LlmTraceRecord::Reply(r) => records.push(r),
            LlmTraceRecord::Failure(f) => failures.push(f),
            LlmTraceRecord::Summary(s) => summary = Some(s),
        }
    }
    let s = summary.ok_or(ContagionError::TraceParse { line: 0, message: "missing summary record".into() })?;
    Ok(LlmTrace {
        seeds: s.seeds,
        seed_emotions: s.seed_emotions,
        rng_seed: s.rng_seed,
        provider: s.provider,
        config: s.config,
        records,
        failures,
        diagnostics: s.diagnostics,
        graph,
    })
}
