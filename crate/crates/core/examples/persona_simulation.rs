//! Builds the simulated reply graph with the persona-driven offline
//! provider: chain forests seeded at every chain head, four reply rounds.
//!
//! ```bash
//! cargo run -p emograph --example persona_simulation -- 0.8 0.2
//! ```

use emograph::contagion::positivity_share_by_round;
use emograph::graph::GraphSummary;
use emograph::scenarios::SimulatedGraphRecipe;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mut recipe = SimulatedGraphRecipe::default();
    if let Some(w) = args.next() {
        recipe.persona.persona_weight = w.parse()?;
    }
    if let Some(b) = args.next() {
        recipe.persona.positivity_bias = b.parse()?;
    }
    let trace = recipe.run()?;
    let s = GraphSummary::of(&trace.graph);
    println!(
        "persona weight {} positivity bias {}: {} replies, graph of {} nodes / {} edges",
        recipe.persona.persona_weight,
        recipe.persona.positivity_bias,
        trace.records.len(),
        s.degree.node_count,
        s.degree.edge_count
    );
    for (round, shares) in positivity_share_by_round(&trace)? {
        println!("  round {round}: +{:.2} ={:.2} -{:.2}", shares.positive, shares.neutral, shares.negative);
    }
    Ok(())
}
