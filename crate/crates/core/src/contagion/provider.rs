use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::Prompt;
use crate::graph::{EmotionLabel, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("could not decode provider response: {0}")]
    Decode(String),
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("no scripted reply for round {round}, {sender} -> {receiver}")]
    NoScriptEntry { round: u32, sender: NodeId, receiver: NodeId },
}

#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub prompt: &'a Prompt,
    pub max_tokens: u32,
    pub temperature: f64,
    pub seed: u64,
}

/// Text generation backend.
pub trait GenerationProvider: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, ProviderError>;
}

#[derive(Debug, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_hash: Option<String>,
    pub reply: String,
}

/// Replays replies from a JSONL script. Lookup order: exact
/// `(round, source, target)`, prompt hash, round-wide entry, default entry.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProvider {
    exact: HashMap<(u32, NodeId, NodeId), String>,
    by_hash: HashMap<String, String>,
    by_round: HashMap<u32, String>,
    default: Option<String>,
}

impl ScriptedProvider {
    pub fn from_jsonl(text: &str) -> Result<Self, ScriptError> {
        let mut p = ScriptedProvider::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| ScriptError { line: i + 1, message };
            let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            let duplicate = match (entry.round, entry.source, entry.target, entry.prompt_hash) {
                (Some(r), Some(s), Some(t), None) => p.exact.insert((r, s, t), entry.reply).is_some(),
                (None, None, None, Some(h)) => p.by_hash.insert(h, entry.reply).is_some(),
                (Some(r), None, None, None) => p.by_round.insert(r, entry.reply).is_some(),
                (None, None, None, None) => p.default.replace(entry.reply).is_some(),
                _ => {
                    return Err(err("key must be (round, source, target), prompt_hash, round alone, or nothing".into()))
                }
            };
            if duplicate {
                return Err(err("duplicate script key".into()));
            }
        }
        Ok(p)
    }

    pub fn from_entries(entries: &[ScriptEntry]) -> Result<Self, ScriptError> {
        let text: String = entries.iter().map(|e| serde_json::to_string(e).expect("entry serializes") + "\n").collect();
        Self::from_jsonl(&text)
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.by_hash.len() + self.by_round.len() + usize::from(self.default.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl GenerationProvider for ScriptedProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, ProviderError> {
        let m = request.prompt.meta;
        self.exact
            .get(&(m.round, m.source, m.target))
            .or_else(|| if self.by_hash.is_empty() { None } else { self.by_hash.get(&request.prompt.hash()) })
            .or_else(|| self.by_round.get(&m.round))
            .or(self.default.as_ref())
            .cloned()
            .ok_or(ProviderError::NoScriptEntry { round: m.round, sender: m.source, receiver: m.target })
    }
}

const POSITIVE_REPLIES: &[&str] = &[
    "Thanks for sharing, this is great news.",
    "I love this, what a wonderful idea.",
    "Glad to see this, very helpful.",
    "Great point, I agree and appreciate it.",
    "This made me happy, thank you.",
    "Nice work, that sounds excellent.",
];

const NEUTRAL_REPLIES: &[&str] = &[
    "I read the article about the schedule.",
    "The meeting is on Tuesday at the library.",
    "Here is the link to the report from the committee.",
    "They posted the numbers for the third quarter.",
    "The update comes out next month.",
    "The thread mentions the new bus route.",
];

const NEGATIVE_REPLIES: &[&str] = &[
    "This is terrible, I hate how this went.",
    "What an awful decision, really disappointing.",
    "I am angry about this, it is a bad idea.",
    "That is a stupid and harmful plan.",
    "This is worse than before, so annoying.",
    "Sad and frustrating news.",
];

/// Canned replies for `label`, each classified as `label` by the bundled lexicon.
pub fn reply_bank(label: EmotionLabel) -> &'static [&'static str] {
    match label {
        EmotionLabel::Positive => POSITIVE_REPLIES,
        EmotionLabel::Neutral => NEUTRAL_REPLIES,
        EmotionLabel::Negative => NEGATIVE_REPLIES,
    }
}

/// Offline stand-in for a language model. The reply's sentiment is the
/// receiver's own mood with probability `persona_weight`; otherwise it is
/// positive with probability `positivity_bias` and follows the requested
/// tone the rest of the time. All draws hash the prompt and seed, so the
/// output is a pure function of both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonaProvider {
    pub persona_weight: f64,
    pub positivity_bias: f64,
}

impl Default for PersonaProvider {
    fn default() -> Self {
        PersonaProvider { persona_weight: 0.6, positivity_bias: 0.35 }
    }
}

impl PersonaProvider {
    pub fn reply_label(&self, prompt: &Prompt, seed: u64) -> (EmotionLabel, usize) {
        let digest = Sha256::new().chain_update(prompt.render().as_bytes()).chain_update(seed.to_le_bytes()).finalize();
        let word = |k: usize| u64::from_le_bytes(digest[k * 8..k * 8 + 8].try_into().expect("8 bytes"));
        let u = (word(0) >> 11) as f64 / (1u64 << 53) as f64;
        let m = prompt.meta;
        let label = if u < self.persona_weight {
            m.receiver_mood
        } else if u < self.persona_weight + (1.0 - self.persona_weight) * self.positivity_bias {
            EmotionLabel::Positive
        } else {
            m.tone
        };
        (label, (word(1) % reply_bank(label).len() as u64) as usize)
    }
}

impl GenerationProvider for PersonaProvider {
    fn name(&self) -> &str {
        "persona"
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, ProviderError> {
        let (label, pick) = self.reply_label(request.prompt, request.seed);
        Ok(reply_bank(label)[pick].to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contagion::prompt::build_prompt;
    use crate::graph::{Edge, EdgeKind, NodeState};
    use crate::sentiment::classify_sentiment;

    fn prompt(round: u32, s: u32, t: u32) -> Prompt {
        let mut e = Edge::new(s, t, EdgeKind::Reply);
        e.depth = Some(round);
        build_prompt(&NodeState::new(s), &NodeState::new(t), &e, EmotionLabel::Neutral)
    }

    fn ask(p: &dyn GenerationProvider, pr: &Prompt) -> Result<String, ProviderError> {
        p.generate(&GenerationRequest { prompt: pr, max_tokens: 64, temperature: 0.0, seed: 1 })
    }

    #[test]
    fn reply_banks_classify_as_labelled() {
        for label in EmotionLabel::ALL {
            for text in reply_bank(label) {
                assert_eq!(classify_sentiment(text).label, label, "{text:?}");
            }
        }
    }

    #[test]
    fn script_lookup_priority() {
        let hashed = prompt(1, 0, 2);
        let script = format!(
            concat!(
                "{{\"round\":1,\"source\":0,\"target\":1,\"reply\":\"exact\"}}\n",
                "{{\"prompt_hash\":\"{}\",\"reply\":\"hash\"}}\n",
                "{{\"round\":1,\"reply\":\"round\"}}\n",
                "{{\"reply\":\"fallback\"}}\n"
            ),
            hashed.hash()
        );
        let p = ScriptedProvider::from_jsonl(&script).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(ask(&p, &prompt(1, 0, 1)).unwrap(), "exact");
        assert_eq!(ask(&p, &hashed).unwrap(), "hash");
        assert_eq!(ask(&p, &prompt(1, 0, 3)).unwrap(), "round");
        assert_eq!(ask(&p, &prompt(2, 0, 1)).unwrap(), "fallback");
    }

    #[test]
    fn missing_entry_is_typed() {
        let p = ScriptedProvider::from_jsonl("{\"round\":1,\"reply\":\"x\"}\n").unwrap();
        assert_eq!(
            ask(&p, &prompt(2, 5, 6)),
            Err(ProviderError::NoScriptEntry { round: 2, sender: NodeId(5), receiver: NodeId(6) })
        );
    }

    #[test]
    fn script_rejects_bad_keys() {
        assert_eq!(ScriptedProvider::from_jsonl("{\"source\":1,\"reply\":\"x\"}").unwrap_err().line, 1);
        assert!(ScriptedProvider::from_jsonl("{\"reply\":\"a\"}\n{\"reply\":\"b\"}").is_err());
        assert!(ScriptedProvider::from_jsonl("{\"reply\":\"a\",\"extra\":1}").is_err());
        assert!(ScriptedProvider::from_jsonl("not json").is_err());
    }

    #[test]
    fn persona_is_pure_and_respects_extremes() {
        let pr = prompt(1, 0, 1);
        let p = PersonaProvider::default();
        assert_eq!(ask(&p, &pr).unwrap(), ask(&p, &pr).unwrap());
        let always_mood = PersonaProvider { persona_weight: 1.0, positivity_bias: 0.0 };
        let always_tone = PersonaProvider { persona_weight: 0.0, positivity_bias: 0.0 };
        let always_pos = PersonaProvider { persona_weight: 0.0, positivity_bias: 1.0 };
        let mut grumpy = pr.clone();
        grumpy.meta.receiver_mood = EmotionLabel::Negative;
        for seed in 0..50 {
            assert_eq!(always_mood.reply_label(&grumpy, seed).0, EmotionLabel::Negative);
            assert_eq!(always_tone.reply_label(&grumpy, seed).0, EmotionLabel::Neutral);
            assert_eq!(always_pos.reply_label(&grumpy, seed).0, EmotionLabel::Positive);
        }
    }
}
