//! The `emograph` command-line tool. Stages talk to each other only through
//! files, so a whole experiment is a short shell script.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage, 3 input/output,
//! 4 configuration, 5 failed assertion, 6 degenerate training task.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contagion::{LlmRunConfig, PersonaProvider};
use crate::graph::{EmotionDistribution, EmotionLabel, NodeId};
use crate::ingest::RecordFormat;
use crate::learn::{LayerKind, TrainConfig};
use crate::propagation::{BatchConfig, Strategy, StrategyParams};

pub use commands::strategy_ordering;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_ASSERTION: i32 = 5;
pub const EXIT_DEGENERATE: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Assertion(_) => EXIT_ASSERTION,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
        }
    }

    fn io(path: &Path, message: impl ToString) -> Self {
        CliError::Io { path: path.display().to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "emograph", version, about = "Emotional contagion experiments on social graphs")]
pub struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an Erdos-Renyi graph or a set of disjoint reply chains.
    GenGraph(GenGraphArgs),
    /// Run one rule-based diffusion and write its trace.
    Simulate(SimulateArgs),
    /// Compare the three strategies over many seeded runs.
    Batch(BatchArgs),
    /// Run an LLM reply cascade over a graph.
    LlmDiffuse(LlmDiffuseArgs),
    /// Build a reply graph from an interaction-record file.
    Ingest(IngestArgs),
    /// Structural metrics of one graph.
    Metrics(MetricsArgs),
    /// Side-by-side metrics of two graphs and their top-k subgraphs.
    Compare(CompareArgs),
    /// Train a GCN emotion classifier on a graph.
    Train(TrainArgs),
    /// Evaluate a trained model on another graph without refitting.
    CrossEval(CrossEvalArgs),
}

#[derive(Debug, Args)]
pub struct GenGraphArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub edge_prob: Option<f64>,
    /// Build this many disjoint chains instead of an Erdos-Renyi graph.
    #[arg(long, conflicts_with_all = ["nodes", "edge_prob"])]
    pub chains: Option<usize>,
    #[arg(long, requires = "chains")]
    pub chain_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a Graphviz rendering.
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    Theory,
    Eic,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => Strategy::Random,
            StrategyArg::Theory => Strategy::Theory,
            StrategyArg::Eic => Strategy::Eic,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub seed_node: Option<u32>,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed; every run derives its own streams from it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub edge_prob: Option<f64>,
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Spread runs over all cores. Results are identical either way.
    #[arg(long)]
    pub parallel: bool,
    /// JSON summary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text table.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    /// Exit with status 5 unless Random > Theory > eIC on mean spread and
    /// on mean reward.
    #[arg(long)]
    pub assert_ordering: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Replies looked up in a JSONL script.
    #[default]
    Mock,
    /// OpenAI-compatible chat-completion endpoint from EMOGRAPH_LLM_URL.
    Http,
    /// Deterministic offline persona model.
    Persona,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ToneArg {
    /// Ask for the sender's current emotion.
    Follow,
    Positive,
    Neutral,
    Negative,
}

#[derive(Debug, Args)]
pub struct LlmDiffuseArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Reply script for the mock provider.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Model name sent to the http provider.
    #[arg(long)]
    pub model: Option<String>,
    /// Seed node; repeat for several.
    #[arg(long)]
    pub seed_node: Vec<u32>,
    /// Seed every node without incoming edges.
    #[arg(long, conflicts_with = "seed_node")]
    pub seed_roots: bool,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(long, value_enum)]
    pub tone: Option<ToneArg>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub persona_weight: Option<f64>,
    #[arg(long)]
    pub positivity_bias: Option<f64>,
    /// Receives trace.jsonl, graph.json and report.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the file extension (.jsonl/.ndjson, otherwise csv).
    #[arg(long)]
    pub format: Option<RecordFormat>,
    /// Keep labels supplied in the file instead of classifying the text.
    #[arg(long)]
    pub trust_external: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Rejection report as JSON.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub graph_a: PathBuf,
    #[arg(long)]
    pub graph_b: PathBuf,
    /// Size of the most-active-user subgraphs.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the two top-k subgraphs here as top-a.json and top-b.json.
    #[arg(long)]
    pub subgraph_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerArg {
    Gcn,
    Mean,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long, value_enum)]
    pub layer: Option<LayerArg>,
    /// Use edge weights and kind multipliers in the adjacency.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossEvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Contents of a `--config` file. Every section is optional; `seed`, when
/// present, replaces the seed of every randomized command.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub gen_graph: GenGraphSettings,
    pub simulate: SimulateSettings,
    pub batch: BatchSettings,
    pub llm_diffuse: LlmSettings,
    pub ingest: IngestSettings,
    pub compare: CompareSettings,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenGraphSettings {
    pub nodes: usize,
    pub edge_prob: f64,
    pub chains: Option<usize>,
    pub chain_len: usize,
    pub emotion_dist: EmotionDistribution,
    pub seed: u64,
}

impl Default for GenGraphSettings {
    fn default() -> Self {
        GenGraphSettings {
            nodes: 10,
            edge_prob: 0.5,
            chains: None,
            chain_len: 4,
            emotion_dist: EmotionDistribution::UNIFORM,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub seed_node: NodeId,
    pub rounds: u32,
    pub rng_seed: u64,
    pub params: StrategyParams,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        SimulateSettings { seed_node: NodeId(0), rounds: 10, rng_seed: 42, params: StrategyParams::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSettings {
    pub runs: usize,
    pub parallel: bool,
    pub experiment: BatchConfig,
}

impl Default for BatchSettings {
    fn default() -> Self {
        BatchSettings { runs: 50, parallel: false, experiment: BatchConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub provider: ProviderKind,
    pub script: Option<PathBuf>,
    pub model: String,
    pub seed_nodes: Vec<NodeId>,
    pub seed_roots: bool,
    pub rng_seed: u64,
    pub run: LlmRunConfig,
    pub persona: PersonaProvider,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings {
            provider: ProviderKind::Mock,
            script: None,
            model: "default".into(),
            seed_nodes: vec![NodeId(0)],
            seed_roots: false,
            rng_seed: 42,
            run: LlmRunConfig::default(),
            persona: PersonaProvider::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    pub format: Option<RecordFormat>,
    pub trust_external: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSettings {
    pub top_k: usize,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings { top_k: 50 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

impl ToneArg {
    fn policy(self) -> crate::contagion::TonePolicy {
        use crate::contagion::TonePolicy;
        match self {
            ToneArg::Follow => TonePolicy::FollowSender,
            ToneArg::Positive => TonePolicy::Fixed(EmotionLabel::Positive),
            ToneArg::Neutral => TonePolicy::Fixed(EmotionLabel::Neutral),
            ToneArg::Negative => TonePolicy::Fixed(EmotionLabel::Negative),
        }
    }
}

impl From<LayerArg> for LayerKind {
    fn from(l: LayerArg) -> Self {
        match l {
            LayerArg::Gcn => LayerKind::Gcn,
            LayerArg::Mean => LayerKind::MeanAggregate,
        }
    }
}

/// An input file with its digest, recorded in the provenance block.
#[derive(Debug, Serialize)]
struct Input {
    path: String,
    sha256: String,
    #[serde(skip)]
    bytes: Vec<u8>,
}

fn read_input(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Input { path: path.display().to_string(), sha256, bytes })
}

/// Tool version, command, the fully resolved settings and input digests.
fn provenance(command: &str, settings: &impl Serialize, inputs: &[&Input]) -> Value {
    json!({
        "tool": "emograph",
        "version": VERSION,
        "command": command,
        "config": settings,
        "inputs": inputs,
    })
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("JSON values serialize");
    bytes.push(b'\n');
    write_output(path, &bytes)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("emograph: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::GenGraph(a) => commands::gen_graph(&config, a),
        Command::Simulate(a) => commands::simulate(&config, a),
        Command::Batch(a) => commands::batch(&config, a),
        Command::LlmDiffuse(a) => commands::llm_diffuse(&config, a),
        Command::Ingest(a) => commands::ingest(&config, a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Compare(a) => commands::compare(&config, a),
        Command::Train(a) => commands::train(&config, a),
        Command::CrossEval(a) => commands::cross_eval(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let err = serde_json::from_str::<RunConfig>(r#"{"gen_graph": {"nodez": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("nodez"));
        let ok: RunConfig = serde_json::from_str(r#"{"seed": 9, "train": {"epochs": 5}}"#).unwrap();
        assert_eq!((ok.seed, ok.train.epochs, ok.train.hidden), (Some(9), 5, 16));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(
            run(["emograph", "simulate", "--graph", "g.json", "--strategy", "greedy", "--out", "t"]),
            EXIT_USAGE
        );
        assert_eq!(run(["emograph", "frobnicate"]), EXIT_USAGE);
    }
}
