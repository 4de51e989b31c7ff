//! Trains the two-layer GCN on the simulated reply graph and prints the
//! loss curve, held-out metrics and confusion matrix.
//!
//! ```bash
//! cargo run --release -p emograph --example train_gcn
//! ```

use emograph::learn::TrainConfig;
use emograph::scenarios::{train_on_simulated, SimulatedGraphRecipe};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (trace, report, _model) = train_on_simulated(&SimulatedGraphRecipe::default(), &TrainConfig::default())?;
    println!("graph: {} nodes, {} labelled replies", trace.graph.node_count(), trace.records.len());
    for (epoch, loss) in report.loss_history.iter().enumerate().step_by(25) {
        println!("  epoch {epoch:>3}  loss {loss:.4}");
    }
    println!("train accuracy {:.3} on {} nodes", report.train.accuracy, report.n_train);
    println!(
        "test accuracy {:.3}, macro-F1 {:.3} on {} nodes",
        report.test.accuracy, report.test.macro_f1, report.n_test
    );
    print!("{}", report.test.confusion_table());
    Ok(())
}
