use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ContagionError, LlmTrace};
use crate::graph::EmotionLabel;
use crate::propagation::DiffusionTrace;

/// Fractions over the three labels, ordered positive, neutral, negative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelShares {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

impl LabelShares {
    pub fn from_counts(counts: [usize; 3]) -> Self {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return LabelShares::default();
        }
        let f = |c: usize| c as f64 / total as f64;
        LabelShares { positive: f(counts[0]), neutral: f(counts[1]), negative: f(counts[2]) }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.positive, self.neutral, self.negative]
    }

    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.as_array()[label.index()]
    }

    pub fn l1(&self, other: &LabelShares) -> f64 {
        self.as_array().iter().zip(other.as_array()).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Label fractions of the replies in each round.
pub fn positivity_share_by_round(trace: &LlmTrace) -> Result<BTreeMap<u32, LabelShares>, ContagionError> {
    if trace.records.is_empty() {
        return Err(ContagionError::Contract("trace has no reply records".into()));
    }
    Ok(round_counts(trace.records.iter().map(|r| (r.round, r.score.label)))
        .into_iter()
        .map(|(round, c)| (round, LabelShares::from_counts(c)))
        .collect())
}

fn round_counts(items: impl Iterator<Item = (u32, EmotionLabel)>) -> BTreeMap<u32, [usize; 3]> {
    let mut counts: BTreeMap<u32, [usize; 3]> = BTreeMap::new();
    for (round, label) in items {
        counts.entry(round).or_default()[label.index()] += 1;
    }
    counts
}

/// Row `a`, column `b`: share of replies by a receiver labelled `b` to a
/// sender labelled `a`. Rows and columns run positive, neutral, negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub rows: [[f64; 3]; 3],
    pub counts: [[usize; 3]; 3],
    /// Rows with no observations, filled with 1/3.
    pub unobserved: [bool; 3],
}

pub fn sentiment_transition_matrix(trace: &LlmTrace) -> TransitionMatrix {
    let mut counts = [[0usize; 3]; 3];
    for r in &trace.records {
        counts[r.source_emotion.index()][r.score.label.index()] += 1;
    }
    let mut rows = [[0.0; 3]; 3];
    let mut unobserved = [false; 3];
    for a in 0..3 {
        let total: usize = counts[a].iter().sum();
        if total == 0 {
            unobserved[a] = true;
            rows[a] = [1.0 / 3.0; 3];
        } else {
            for b in 0..3 {
                rows[a][b] = counts[a][b] as f64 / total as f64;
            }
        }
    }
    TransitionMatrix { rows, counts, unobserved }
}

/// Activation view shared by stochastic and LLM traces.
pub trait ActivationLog {
    /// `(round, label)` of every node activated after the seeds.
    fn activations(&self) -> Vec<(u32, EmotionLabel)>;
}

impl ActivationLog for LlmTrace {
    fn activations(&self) -> Vec<(u32, EmotionLabel)> {
        self.records.iter().map(|r| (r.round, r.score.label)).collect()
    }
}

impl ActivationLog for DiffusionTrace {
    fn activations(&self) -> Vec<(u32, EmotionLabel)> {
        self.events.iter().filter(|e| e.success).map(|e| (e.round, e.emotion_transmitted)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionProfile {
    /// Latest activation round.
    pub depth: u32,
    /// Nodes activated after the seeds.
    pub breadth: usize,
    /// L1 distance between the first and last round's label shares.
    pub drift: f64,
    pub first_round: LabelShares,
    pub final_round: LabelShares,
}

impl DiffusionProfile {
    pub fn of(trace: &impl ActivationLog) -> Self {
        let counts = round_counts(trace.activations().into_iter());
        let first = counts.first_key_value().map(|(_, c)| LabelShares::from_counts(*c)).unwrap_or_default();
        let last = counts.last_key_value().map(|(_, c)| LabelShares::from_counts(*c)).unwrap_or_default();
        DiffusionProfile {
            depth: counts.keys().next_back().copied().unwrap_or(0),
            breadth: counts.values().map(|c| c.iter().sum::<usize>()).sum(),
            drift: first.l1(&last),
            first_round: first,
            final_round: last,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionComparison {
    pub a: DiffusionProfile,
    pub b: DiffusionProfile,
    pub depth_delta: i64,
    pub breadth_delta: i64,
    /// L1 distance between the two traces' final-round label shares.
    pub drift_delta: f64,
}

pub fn compare_diffusion(a: &impl ActivationLog, b: &impl ActivationLog) -> DiffusionComparison {
    let (pa, pb) = (DiffusionProfile::of(a), DiffusionProfile::of(b));
    DiffusionComparison {
        depth_delta: i64::from(pb.depth) - i64::from(pa.depth),
        breadth_delta: pb.breadth as i64 - pa.breadth as i64,
        drift_delta: pa.final_round.l1(&pb.final_round),
        a: pa,
        b: pb,
    }
}
