//! Generates an Erdős–Rényi graph and a chain forest, prints their
//! structure and writes the first as Graphviz DOT to stdout on request.
//!
//! ```bash
//! cargo run -p emograph --example generate_graphs
//! cargo run -p emograph --example generate_graphs -- --dot | dot -Tsvg > er.svg
//! ```

use emograph::graph::{
    generate_chain_graphs, generate_er_graph, init_node_attributes, to_dot, EmotionDistribution, GraphSummary,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let er = init_node_attributes(generate_er_graph(10, 0.5, 42)?, &EmotionDistribution::UNIFORM, 42)?;
    if std::env::args().any(|a| a == "--dot") {
        print!("{}", to_dot(&er));
        return Ok(());
    }
    let chains = generate_chain_graphs(100, 4, 42)?;
    for (name, graph) in [("er(10, 0.5)", &er), ("chains(100 x 4)", &chains)] {
        let s = GraphSummary::of(graph);
        println!(
            "{name:<16} nodes {:>3}  edges {:>3}  avg degree {:.2}  clustering {:.3}  components {}",
            s.degree.node_count, s.degree.edge_count, s.degree.average_degree, s.clustering, s.components
        );
    }
    for node in er.nodes() {
        println!(
            "  node {:>2}: {:<8} credibility {:.2}  susceptibility {:.2}",
            node.id.0,
            node.emotion.as_str(),
            node.credibility,
            node.susceptibility
        );
    }
    Ok(())
}
