//! Runs one diffusion per strategy on the same graph and prints the
//! round-by-round growth with the reward breakdown.
//!
//! ```bash
//! cargo run -p emograph --example simulate_strategies -- 7
//! ```

use emograph::graph::{generate_er_graph, init_node_attributes, EmotionDistribution, NodeId};
use emograph::propagation::{run_simulation, Strategy, StrategyParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(42);
    let graph = init_node_attributes(generate_er_graph(30, 0.3, seed)?, &EmotionDistribution::UNIFORM, seed)?;
    for strategy in [Strategy::Random, Strategy::Theory, Strategy::Eic] {
        let trace = run_simulation(&graph, &StrategyParams::for_strategy(strategy), NodeId(0), 10, seed)?;
        let r = trace.reward;
        println!(
            "{:<22} spread {:>2}  sizes {:?}\n{:<22} reward {:.3} = spread {:.3} + polar {:.3} + cred {:.3}",
            strategy.display_name(),
            trace.spread(),
            trace.round_sizes,
            "",
            r.total,
            r.r_spread,
            r.r_polar,
            r.r_cred
        );
        for w in &trace.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
