use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::graph::{Edge, EmotionLabel, NodeId, NodeState};

pub const SYSTEM_PREAMBLE: &str = "You are a user of an online discussion forum. \
Write a single short reply (one or two sentences) to the message you are shown. \
Do not mention that you are simulated.";

/// Fixed tone instructions, indexed by the requested label.
pub fn tone_instruction(tone: EmotionLabel) -> &'static str {
    match tone {
        EmotionLabel::Positive => "Reply in a warm, positive tone.",
        EmotionLabel::Neutral => "Maintain a neutral tone.",
        EmotionLabel::Negative => "Reply in a critical, negative tone.",
    }
}

/// Structured fields a provider may key on without parsing text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptMeta {
    pub round: u32,
    pub source: NodeId,
    pub target: NodeId,
    pub tone: EmotionLabel,
    pub receiver_mood: EmotionLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system_preamble: String,
    pub sender_context: String,
    pub receiver_persona: String,
    pub interaction_context: String,
    pub instruction: String,
    pub meta: PromptMeta,
}

impl Prompt {
    /// User-turn text: every slot except the system preamble.
    pub fn user_message(&self) -> String {
        format!(
            "Message from: {}\nYou are: {}\nSetting: {}\nInstruction: {}",
            self.sender_context, self.receiver_persona, self.interaction_context, self.instruction
        )
    }

    pub fn render(&self) -> String {
        format!("{}\n\n{}", self.system_preamble, self.user_message())
    }

    /// Lowercase hex SHA-256 of [`Prompt::render`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Prompt for `receiver` replying to `sender` across `edge`. The edge depth,
/// when present, is the thread position (diffusion round).
pub fn build_prompt(sender: &NodeState, receiver: &NodeState, edge: &Edge, tone: EmotionLabel) -> Prompt {
    let round = edge.depth.unwrap_or(0);
    let position = match edge.depth {
        Some(d) => format!("thread position {d}"),
        None => "thread position unknown".to_string(),
    };
    Prompt {
        system_preamble: SYSTEM_PREAMBLE.to_string(),
        sender_context: format!(
            "user {} (feeling {}, credibility {:.2})",
            sender.id, sender.emotion, sender.credibility
        ),
        receiver_persona: format!(
            "user {} (currently {}, susceptibility {:.2})",
            receiver.id, receiver.emotion, receiver.susceptibility
        ),
        interaction_context: format!("{} to user {}, {position}", edge.kind.as_str(), sender.id),
        instruction: tone_instruction(tone).to_string(),
        meta: PromptMeta { round, source: sender.id, target: receiver.id, tone, receiver_mood: receiver.emotion },
    }
}
