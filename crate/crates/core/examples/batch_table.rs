//! Runs the three propagation strategies over independently generated
//! random graphs and prints the summary table.
//!
//! ```bash
//! cargo run -p emograph --example batch_table -- 200
//! ```

use emograph::propagation::{batch_experiment, render_table, BatchConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50);
    let summary = batch_experiment(&BatchConfig::default(), runs)?;
    print!("{}", render_table(&summary));
    Ok(())
}
