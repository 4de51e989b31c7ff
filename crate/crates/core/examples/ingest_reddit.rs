//! Parses a reply export (CSV or JSON lines), reports rejected rows and
//! prints the structure of the resulting interaction graph.
//!
//! ```bash
//! cargo run -p emograph --example ingest_reddit -- crates/core/fixtures/interactions.csv
//! ```

use std::path::PathBuf;

use emograph::graph::GraphSummary;
use emograph::ingest::{build_real_graph, parse_interaction_records, BuildOptions, RecordFormat};
use emograph::sentiment::LexiconClassifier;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/interactions.csv"));
    let parsed = parse_interaction_records(&path, RecordFormat::from_path(&path))?;
    println!("{} accepted, {} rejected", parsed.records.len(), parsed.report.total());
    for r in &parsed.report.rejections {
        println!("  line {}: {}", r.line, r.reason.as_str());
    }
    let real = build_real_graph(&parsed.records, LexiconClassifier::bundled(), BuildOptions::default())?;
    for w in &real.warnings {
        println!("  warning: {w}");
    }
    let s = GraphSummary::of(&real.graph);
    println!(
        "graph: {} users, {} replies, clustering {:.4}, reciprocity {:.3}, components {}",
        s.degree.node_count,
        s.degree.edge_count,
        s.clustering,
        s.reciprocity.unwrap_or(0.0),
        s.components
    );
    for e in real.graph.edges() {
        println!("  {} -> {}  {}", e.source.0, e.target.0, e.label.map_or("-", |l| l.as_str()));
    }
    Ok(())
}
