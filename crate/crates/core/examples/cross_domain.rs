//! Trains on the simulated graph and scores the same model on a real
//! interaction graph, showing how much of the fit transfers.
//!
//! ```bash
//! cargo run --release -p emograph --example cross_domain -- crates/core/fixtures/interactions.csv
//! ```

use std::path::PathBuf;

use emograph::ingest::{build_real_graph, parse_interaction_records, BuildOptions, RecordFormat};
use emograph::learn::{cross_domain_eval, TrainConfig};
use emograph::scenarios::{train_on_simulated, SimulatedGraphRecipe};
use emograph::sentiment::LexiconClassifier;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/interactions.csv"));
    let (_, report, model) = train_on_simulated(&SimulatedGraphRecipe::default(), &TrainConfig::default())?;
    let parsed = parse_interaction_records(&path, RecordFormat::from_path(&path))?;
    let real = build_real_graph(&parsed.records, LexiconClassifier::bundled(), BuildOptions::default())?;
    let cross = cross_domain_eval(&model, &real.graph)?;
    println!("in-domain test:  accuracy {:.3}  macro-F1 {:.3}", report.test.accuracy, report.test.macro_f1);
    println!(
        "cross-domain:    accuracy {:.3}  macro-F1 {:.3}  ({} nodes)",
        cross.accuracy, cross.macro_f1, cross.evaluated
    );
    print!("{}", cross.confusion_table());
    Ok(())
}
