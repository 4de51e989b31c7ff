use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_simulation, SimError, Strategy, StrategyParams};
use crate::graph::{generate_er_graph, init_node_attributes, EmotionDistribution, NodeId};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub nodes: usize,
    pub edge_prob: f64,
    pub emotion_dist: EmotionDistribution,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { nodes: 10, edge_prob: 0.5, emotion_dist: EmotionDistribution::UNIFORM }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub master_seed: u64,
    pub generator: GeneratorConfig,
    /// One entry per strategy to compare, reported in this order.
    pub strategies: Vec<StrategyParams>,
    pub seed_node: NodeId,
    pub max_rounds: u32,
    /// Run simulations on the rayon pool. Results do not depend on it.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            master_seed: 42,
            generator: GeneratorConfig::default(),
            strategies: Strategy::ALL.iter().map(|s| StrategyParams::for_strategy(*s)).collect(),
            seed_node: NodeId(0),
            max_rounds: 10,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub avg_spread: f64,
    pub avg_reward: f64,
    pub max_spread: usize,
    pub min_spread: usize,
    pub max_reward: f64,
    pub min_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub runs: usize,
    pub strategies: Vec<StrategySummary>,
    pub config: BatchConfig,
}

impl BatchSummary {
    pub fn get(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == strategy)
    }
}

/// `(spread, total reward)` of one independent run: fresh graph, fresh
/// attributes, fresh simulation stream, all derived from the master seed.
fn single_run(config: &BatchConfig, strategy_slot: usize, run: usize) -> Result<(usize, f64), SimError> {
    let params = &config.strategies[strategy_slot];
    let path = |purpose: u64| derive_seed(config.master_seed, &[strategy_slot as u64, run as u64, purpose]);
    let graph = generate_er_graph(config.generator.nodes, config.generator.edge_prob, path(0))?;
    let graph = init_node_attributes(graph, &config.generator.emotion_dist, path(1))?;
    let trace = run_simulation(&graph, params, config.seed_node, config.max_rounds, path(2))?;
    Ok((trace.spread(), trace.reward.total))
}

pub fn batch_experiment(config: &BatchConfig, n_runs: usize) -> Result<BatchSummary, SimError> {
    if n_runs < 1 {
        return Err(SimError::Argument("n_runs must be at least 1".into()));
    }
    let mut strategies = Vec::with_capacity(config.strategies.len());
    for (slot, params) in config.strategies.iter().enumerate() {
        params.validate()?;
        let results: Vec<(usize, f64)> = if config.parallel {
            (0..n_runs).into_par_iter().map(|r| single_run(config, slot, r)).collect::<Result<_, _>>()?
        } else {
            (0..n_runs).map(|r| single_run(config, slot, r)).collect::<Result<_, _>>()?
        };
        let spreads = results.iter().map(|r| r.0);
        let rewards = results.iter().map(|r| r.1);
        strategies.push(StrategySummary {
            strategy: params.strategy,
            avg_spread: spreads.clone().sum::<usize>() as f64 / n_runs as f64,
            avg_reward: rewards.clone().sum::<f64>() / n_runs as f64,
            max_spread: spreads.clone().max().unwrap_or(0),
            min_spread: spreads.min().unwrap_or(0),
            max_reward: rewards.clone().fold(f64::NEG_INFINITY, f64::max),
            min_reward: rewards.fold(f64::INFINITY, f64::min),
        });
    }
    Ok(BatchSummary { runs: n_runs, strategies, config: config.clone() })
}

/// Plain-text table with columns Strategy, Avg. Spread, Avg. Reward, Max
/// Spread, Min Spread, Max Reward, Min Reward.
pub fn render_table(summary: &BatchSummary) -> String {
    let header = ["Strategy", "Avg. Spread", "Avg. Reward", "Max Spread", "Min Spread", "Max Reward", "Min Reward"];
    let rows: Vec<[String; 7]> = summary
        .strategies
        .iter()
        .map(|s| {
            [
                s.strategy.display_name().to_string(),
                format!("{:.2}", s.avg_spread),
                format!("{:.3}", s.avg_reward),
                s.max_spread.to_string(),
                s.min_spread.to_string(),
                format!("{:.3}", s.max_reward),
                format!("{:.3}", s.min_reward),
            ]
        })
        .collect();
    let widths: Vec<usize> =
        (0..7).map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0)).collect();
    let mut out = String::new();
    let line = |cells: &[&str], out: &mut String| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(
                |(i, c)| {
                    if i == 0 {
                        format!("{:<w$}", c, w = widths[i])
                    } else {
                        format!("{:>w$}", c, w = widths[i])
                    }
                },
            )
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&header, &mut out);
    for r in &rows {
        line(&r.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_zero_propagation() {
        let mut config = BatchConfig::default();
        for p in &mut config.strategies {
            p.p_fixed = 0.0;
            p.base_p = 0.0;
        }
        // Theory needs zero susceptibility or credibility: use neutral-only
        // senders with zero intensity.
        config.generator.emotion_dist = EmotionDistribution::only(crate::graph::EmotionLabel::Neutral);
        for p in &mut config.strategies {
            p.neutral_intensity = 0.0;
        }
        let s = batch_experiment(&config, 20).unwrap();
        for row in &s.strategies {
            assert_eq!((row.avg_spread, row.avg_reward, row.max_spread), (0.0, 0.0, 0));
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut config = BatchConfig::default();
        let a = batch_experiment(&config, 30).unwrap();
        config.parallel = true;
        let b = batch_experiment(&config, 30).unwrap();
        assert_eq!(a.strategies, b.strategies);
    }

    #[test]
    fn summary_bounds_hold() {
        let s = batch_experiment(&BatchConfig::default(), 40).unwrap();
        for row in &s.strategies {
            assert!(row.min_spread as f64 <= row.avg_spread && row.avg_spread <= row.max_spread as f64);
            assert!(row.min_reward <= row.avg_reward && row.avg_reward <= row.max_reward);
        }
    }

    #[test]
    fn table_has_header_in_order() {
        let s = batch_experiment(&BatchConfig::default(), 5).unwrap();
        let table = render_table(&s);
        let header: Vec<&str> =
            table.lines().next().unwrap().split("  ").filter(|c| !c.trim().is_empty()).map(str::trim).collect();
        assert_eq!(
            header,
            ["Strategy", "Avg. Spread", "Avg. Reward", "Max Spread", "Min Spread", "Max Reward", "Min Reward"]
        );
        assert_eq!(table.lines().count(), 4);
        assert!(table.lines().nth(3).unwrap().starts_with("eIC"));
    }
}
