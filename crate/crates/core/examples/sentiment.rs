//! Scores sentences with the bundled lexicon classifier, or each line of
//! stdin when `-` is given.
//!
//! ```bash
//! cargo run -p emograph --example sentiment
//! echo "what a terrible idea" | cargo run -p emograph --example sentiment -- -
//! ```

use std::io::BufRead;

use emograph::ingest::normalize_text;
use emograph::sentiment::classify_sentiment;

const SAMPLES: [&str; 4] = [
    "Thanks, glad to hear that, great point.",
    "The meeting is at noon.",
    "This is awful and I hate it.",
    "Not bad at all!",
];

fn main() -> std::io::Result<()> {
    let lines: Vec<String> = if std::env::args().nth(1).as_deref() == Some("-") {
        std::io::stdin().lock().lines().collect::<Result<_, _>>()?
    } else {
        SAMPLES.iter().map(|s| s.to_string()).collect()
    };
    for line in lines {
        let s = classify_sentiment(&line);
        println!("{:>7.4} {:<8} hits {}  {line:?}", s.compound, s.label.as_str(), s.token_hits);
        println!("        tokens {:?}", normalize_text(&line));
    }
    Ok(())
}
