//! LLM-driven reply cascades: prompts, generation providers, diffusion
//! runs and the drift statistics computed over them.

mod analysis;
mod diffusion;
pub mod http;
mod prompt;
mod provider;

use thiserror::Error;

use crate::graph::GraphError;

pub use analysis::{
    compare_diffusion, positivity_share_by_round, sentiment_transition_matrix, ActivationLog, DiffusionComparison,
    DiffusionProfile, LabelShares, TransitionMatrix,
};
pub use diffusion::{
    read_llm_trace_jsonl, run_llm_diffusion, run_llm_diffusion_from, write_llm_trace_jsonl, EdgeFailure, LlmRunConfig,
    LlmTrace, LlmTraceRecord, LlmTraceSummary, ReplyRecord, TonePolicy,
};
pub use http::{HttpConfig, HttpProvider};
pub use prompt::{build_prompt, tone_instruction, Prompt, PromptMeta, SYSTEM_PREAMBLE};
pub use provider::{
    reply_bank, GenerationProvider, GenerationRequest, PersonaProvider, ProviderError, ScriptEntry, ScriptError,
    ScriptedProvider,
};

#[derive(Debug, Error)]
pub enum ContagionError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("trace line {line}: {message}")]
    TraceParse { line: usize, message: String },
}
