//! Contrasts a simulated chain forest with a real interaction graph:
//! summary metrics side by side, then the same for their top-degree cores.
//!
//! ```bash
//! cargo run -p emograph --example compare_graphs
//! ```

use std::path::Path;

use emograph::graph::{generate_chain_graphs, top_k_by_degree, Graph, GraphSummary};
use emograph::ingest::{build_real_graph, parse_interaction_records, BuildOptions, RecordFormat};
use emograph::sentiment::LexiconClassifier;

fn row(name: &str, g: &Graph) {
    let s = GraphSummary::of(g);
    let recip = s.reciprocity.map_or("-".to_string(), |r| format!("{r:.3}"));
    println!(
        "{name:<14} {:>5} {:>5} {:>8.3} {:>10.4} {:>11} {:>10}",
        s.degree.node_count, s.degree.edge_count, s.degree.average_degree, s.clustering, recip, s.components
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sim = generate_chain_graphs(100, 4, 42)?;
    let csv = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/interactions.csv");
    let parsed = parse_interaction_records(&csv, RecordFormat::Csv)?;
    let real = build_real_graph(&parsed.records, LexiconClassifier::bundled(), BuildOptions::default())?.graph;

    println!(
        "{:<14} {:>5} {:>5} {:>8} {:>10} {:>11} {:>10}",
        "graph", "nodes", "edges", "avg deg", "clustering", "reciprocity", "components"
    );
    row("simulated", &sim);
    row("real", &real);
    row("simulated@50", &top_k_by_degree(&sim, 50));
    row("real@50", &top_k_by_degree(&real, 50));
    Ok(())
}
