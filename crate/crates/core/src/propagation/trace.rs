use serde::{Deserialize, Serialize};

use super::{PropagationEvent, RewardBreakdown, RewardWeights, SimError, Strategy};
use crate::graph::NodeId;

/// Complete, replayable record of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTrace {
    pub strategy: Strategy,
    pub seed_node: NodeId,
    pub rng_seed: u64,
    pub graph_seed: Option<u64>,
    pub events: Vec<PropagationEvent>,
    /// Active-node count after each round; index 0 is the seed alone.
    pub round_sizes: Vec<usize>,
    pub reward: RewardBreakdown,
    pub reward_weights: RewardWeights,
    pub warnings: Vec<String>,
}

impl DiffusionTrace {
    /// Nodes infected during the run, excluding the seed.
    pub fn spread(&self) -> usize {
        self.events.iter().filter(|e| e.success).count()
    }

    pub fn rounds(&self) -> usize {
        self.round_sizes.len().saturating_sub(1)
    }
}

/// One JSONL line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum TraceRecord {
    Event(PropagationEvent),
    Summary(TraceSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub strategy: Strategy,
    pub seed_node: NodeId,
    pub rng_seed: u64,
    pub graph_seed: Option<u64>,
    pub spread: usize,
    pub round_sizes: Vec<usize>,
    pub reward: RewardBreakdown,
    pub reward_weights: RewardWeights,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<serde_json::Value>,
}

/// One event per line followed by a terminal summary line.
pub fn write_trace_jsonl(trace: &DiffusionTrace, annotations: Option<serde_json::Value>) -> String {
    let mut out = String::new();
    for e in &trace.events {
        out.push_str(&serde_json::to_string(&TraceRecord::Event(e.clone())).expect("event serializes"));
        out.push('\n');
    }
    let summary = TraceSummary {
        strategy: trace.strategy,
        seed_node: trace.seed_node,
        rng_seed: trace.rng_seed,
        graph_seed: trace.graph_seed,
        spread: trace.spread(),
        round_sizes: trace.round_sizes.clone(),
        reward: trace.reward,
        reward_weights: trace.reward_weights,
        warnings: trace.warnings.clone(),
        annotations,
    };
    out.push_str(&serde_json::to_string(&TraceRecord::Summary(summary)).expect("summary serializes"));
    out.push('\n');
    out
}

pub fn read_trace_jsonl(text: &str) -> Result<DiffusionTrace, SimError> {
    let mut events = Vec::new();
    let mut summary = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord =
            serde_json::from_str(line).map_err(|e| SimError::TraceParse { line: i + 1, message: e.to_string() })?;
        match record {
            TraceRecord::Event(e) if summary.is_none() => events.push(e),
            TraceRecord::Event(_) => {
                return Err(SimError::TraceParse { line: i + 1, message: "event after summary record".into() })
            }
            TraceRecord::Summary(s) => summary = Some(s),
        }
    }
    let s = summary.ok_or(SimError::TraceParse { line: 0, message: "missing summary record".into() })?;
    Ok(DiffusionTrace {
        strategy: s.strategy,
        seed_node: s.seed_node,
        rng_seed: s.rng_seed,
        graph_seed: s.graph_seed,
        events,
        round_sizes: s.round_sizes,
        reward: s.reward,
        reward_weights: s.reward_weights,
        warnings: s.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_er_graph, init_node_attributes};
    use crate::propagation::{reward, run_simulation, StrategyParams};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn replay_reproduces_reward_bit_for_bit(gseed in any::<u64>(), aseed in any::<u64>(), rseed in any::<u64>(), s in 0usize..3) {
            let g = init_node_attributes(generate_er_graph(10, 0.5, gseed).unwrap(), &Default::default(), aseed).unwrap();
            let params = StrategyParams::for_strategy(super::Strategy::ALL[s]);
            let trace = run_simulation(&g, &params, NodeId(0), 10, rseed).unwrap();
            let text = write_trace_jsonl(&trace, None);
            let back = read_trace_jsonl(&text).unwrap();
            prop_assert_eq!(&back, &trace);
            let r = reward(&back);
            prop_assert_eq!(r.total.to_bits(), trace.reward.total.to_bits());
            prop_assert_eq!(r.r_cred.to_bits(), trace.reward.r_cred.to_bits());
            prop_assert_eq!(write_trace_jsonl(&back, None), text);
        }
    }

    #[test]
    fn missing_summary_is_an_error() {
        assert!(read_trace_jsonl("").is_err());
        assert!(matches!(read_trace_jsonl("{\"record\":\"nope\"}"), Err(SimError::TraceParse { line: 1, .. })));
    }
}
