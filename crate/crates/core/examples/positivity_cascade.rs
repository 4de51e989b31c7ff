//! Replays the scripted reply cascade: a neutral seed post draws mostly
//! positive replies, and the second wave of replies is positive throughout.
//!
//! ```bash
//! cargo run -p emograph --example positivity_cascade
//! ```

use emograph::contagion::{positivity_share_by_round, sentiment_transition_matrix};
use emograph::graph::EmotionLabel;
use emograph::scenarios::run_positivity_cascade;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = run_positivity_cascade(0)?;
    for (round, shares) in positivity_share_by_round(&trace)? {
        let n = trace.records_in_round(round).count();
        println!(
            "round {round}: {n} replies  positive {:.1}%  neutral {:.1}%  negative {:.1}%",
            100.0 * shares.positive,
            100.0 * shares.neutral,
            100.0 * shares.negative
        );
    }
    let first = &trace.records[0];
    println!(
        "\nfirst reply ({} -> {}): {:?} [{}]",
        first.source.0,
        first.target.0,
        first.reply,
        first.score.label.as_str()
    );
    let m = sentiment_transition_matrix(&trace);
    println!("\nsender -> reply transition rows (positive, neutral, negative):");
    for (i, label) in EmotionLabel::ALL.iter().enumerate() {
        let row = m.rows[i];
        let note = if m.unobserved[i] { "  (no senders)" } else { "" };
        println!("  {:<8} {:.3} {:.3} {:.3}{note}", label.as_str(), row[0], row[1], row[2]);
    }
    Ok(())
}
