//! The shipped fixture files must match what the library builds, so the
//! files and the in-code scenarios cannot drift apart.

use std::path::Path;

use emograph::graph::serialize_graph;
use emograph::scenarios::{planted_label_graph, positivity_graph, positivity_script_jsonl};

fn read(name: &str) -> Vec<u8> {
    std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

#[test]
fn positivity_fixture_matches_scenario() {
    assert_eq!(read("positivity-graph.json"), serialize_graph(&positivity_graph().unwrap()));
    assert_eq!(read("positivity-script.jsonl"), positivity_script_jsonl().into_bytes());
}

#[test]
fn planted_fixture_matches_scenario() {
    assert_eq!(read("planted-graph.json"), serialize_graph(&planted_label_graph()));
}
