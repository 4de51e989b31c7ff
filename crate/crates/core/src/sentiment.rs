//! Rule-based sentiment scoring over a bundled valence lexicon.
//!
//! Per token: lexicon valence, scaled by an immediately preceding
//! intensifier, scaled when the token is shouted in otherwise mixed-case
//! text, and flipped when a negator appears in the three preceding tokens.
//! The sum gets an exclamation boost and is squashed to
//! `s / sqrt(s² + 15)`. Labels cut at ±0.05.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::EmotionLabel;

pub const LEXICON_VERSION: &str = "lexicon-v1";
pub const NEGATION_WINDOW: usize = 3;
pub const NEGATION_SCALAR: f64 = -0.74;
pub const INTENSIFIER_MULTIPLIER: f64 = 1.293;
pub const ALL_CAPS_MULTIPLIER: f64 = 1.5;
pub const EXCLAMATION_BOOST: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 3;
pub const NORMALIZATION_ALPHA: f64 = 15.0;
pub const LABEL_THRESHOLD: f64 = 0.05;

static BUNDLED_LEXICON: &str = include_str!("../data/lexicon-v1.tsv");

const NEGATORS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "neednt", "never", "none", "nope", "nor", "not", "nothing", "nowhere",
    "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "without", "wont", "wouldnt", "rarely", "seldom",
    "despite",
];

const INTENSIFIERS: &[&str] = &[
    "absolutely",
    "amazingly",
    "awfully",
    "completely",
    "considerably",
    "decidedly",
    "deeply",
    "enormously",
    "entirely",
    "especially",
    "exceptionally",
    "extremely",
    "fabulously",
    "fully",
    "greatly",
    "highly",
    "hugely",
    "incredibly",
    "intensely",
    "majorly",
    "more",
    "most",
    "particularly",
    "purely",
    "quite",
    "really",
    "remarkably",
    "so",
    "substantially",
    "thoroughly",
    "totally",
    "tremendously",
    "unbelievably",
    "unusually",
    "utterly",
    "very",
];

#[derive(Debug, Error)]
#[error("lexicon line {line}: {message}")]
pub struct LexiconError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub label: EmotionLabel,
    pub token_hits: u32,
}

/// Anything that can turn a text into a sentiment score.
pub trait SentimentClassifier: Send + Sync {
    fn classify(&self, text: &str) -> SentimentScore;
}

/// Threshold rule shared by every classifier.
pub fn label_for(compound: f64) -> EmotionLabel {
    if compound >= LABEL_THRESHOLD {
        EmotionLabel::Positive
    } else if compound <= -LABEL_THRESHOLD {
        EmotionLabel::Negative
    } else {
        EmotionLabel::Neutral
    }
}

pub fn normalize_score(s: f64) -> f64 {
    s / (s * s + NORMALIZATION_ALPHA).sqrt()
}

#[derive(Debug, Clone)]
pub struct LexiconClassifier {
    valences: HashMap<String, f64>,
}

impl LexiconClassifier {
    /// Parses `token<TAB>valence` lines; `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut valences = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| LexiconError { line: i + 1, message: message.to_string() };
            let (token, value) = line.split_once('\t').ok_or_else(|| err("expected token<TAB>valence"))?;
            let value: f64 = value.trim().parse().map_err(|_| err("valence is not a number"))?;
            if valences.insert(token.to_string(), value).is_some() {
                return Err(err("duplicate token"));
            }
        }
        Ok(LexiconClassifier { valences })
    }

    pub fn bundled() -> &'static LexiconClassifier {
        static CELL: OnceLock<LexiconClassifier> = OnceLock::new();
        CELL.get_or_init(|| LexiconClassifier::from_tsv(BUNDLED_LEXICON).expect("bundled lexicon is well formed"))
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(&token.to_lowercase()).copied()
    }

    /// Raw (unnormalised) sentiment sum and lexicon hit count.
    pub fn raw_score(&self, text: &str) -> (f64, u32) {
        let tokens = tokenize(text);
        let upper_count = tokens.iter().filter(|t| is_upper(t)).count();
        let mixed_case = upper_count > 0 && upper_count < tokens.len();
        let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();

        let mut sum = 0.0;
        let mut hits = 0u32;
        for (i, token) in tokens.iter().enumerate() {
            let Some(mut v) = self.valences.get(&lowered[i]).copied() else {
                continue;
            };
            hits += 1;
            if mixed_case && is_upper(token) {
                v *= ALL_CAPS_MULTIPLIER;
            }
            if i > 0 && INTENSIFIERS.contains(&lowered[i - 1].as_str()) {
                v *= INTENSIFIER_MULTIPLIER;
            }
            let window = &lowered[i.saturating_sub(NEGATION_WINDOW)..i];
            if window.iter().any(|w| is_negator(w)) {
                v *= NEGATION_SCALAR;
            }
            sum += v;
        }
        let bangs = text.chars().filter(|c| *c == '!').count().min(MAX_EXCLAMATIONS) as f64;
        if sum > 0.0 {
            sum += bangs * EXCLAMATION_BOOST;
        } else if sum < 0.0 {
            sum -= bangs * EXCLAMATION_BOOST;
        }
        (sum, hits)
    }
}

impl SentimentClassifier for LexiconClassifier {
    fn classify(&self, text: &str) -> SentimentScore {
        let (sum, token_hits) = self.raw_score(text);
        let compound = normalize_score(sum);
        SentimentScore { compound, label: label_for(compound), token_hits }
    }
}

/// Scores `text` with the bundled lexicon.
pub fn classify_sentiment(text: &str) -> SentimentScore {
    LexiconClassifier::bundled().classify(text)
}

fn is_negator(word: &str) -> bool {
    let squashed: String = word.chars().filter(|c| *c != '\'').collect();
    NEGATORS.contains(&squashed.as_str()) || word.contains("n't")
}

/// At least one cased character and no lowercase ones.
fn is_upper(token: &str) -> bool {
    token.chars().any(char::is_uppercase) && !token.chars().any(char::is_lowercase)
}

/// Whitespace split; surrounding punctuation stripped unless that would
/// leave two characters or fewer (keeps emoticons); one-character tokens
/// dropped.
fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| {
            let stripped = t.trim_matches(|c: char| c.is_ascii_punctuation());
            if stripped.chars().count() <= 2 {
                t
            } else {
                stripped
            }
        })
        .filter(|t| t.chars().count() > 1)
        .collect()
}
