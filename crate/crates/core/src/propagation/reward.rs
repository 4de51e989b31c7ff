use serde::{Deserialize, Serialize};

use super::DiffusionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_spread: f64,
    pub r_polar: f64,
    pub r_cred: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub spread: f64,
    pub polar: f64,
    pub cred: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights { spread: 1.0, polar: 1.0, cred: 1.0 }
    }
}

/// Composite reward over the nodes infected during the run (seed excluded):
///
/// * `r_spread = ln(1 + |infected|)`
/// * `r_polar = -Var(e_v)`, population variance of the ±1/0 encoding,
///   zero for fewer than two infected nodes
/// * `r_cred = Σ c_v`
pub fn reward(trace: &DiffusionTrace) -> RewardBreakdown {
    let infected: Vec<(f64, f64)> = trace
        .events
        .iter()
        .filter(|e| e.success)
        .map(|e| (e.emotion_transmitted.value(), e.receiver_credibility))
        .collect();
    let k = infected.len();
    let r_spread = (1.0 + k as f64).ln();
    let variance = if k <= 1 {
        0.0
    } else {
        let mean = infected.iter().fold(0.0, |acc, (e, _)| acc + e) / k as f64;
        infected.iter().map(|(e, _)| (e - mean) * (e - mean)).sum::<f64>() / k as f64
    };
    // Avoid a signed zero in the output.
    let r_polar = if variance == 0.0 { 0.0 } else { -variance };
    let r_cred = infected.iter().fold(0.0, |acc, (_, c)| acc + c);
    let w = trace.reward_weights;
    let total = w.spread * r_spread + w.polar * r_polar + w.cred * r_cred;
    RewardBreakdown { r_spread, r_polar, r_cred, total }
}
