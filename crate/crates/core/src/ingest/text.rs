//! Comment text normalization: URL removal, letters only, lowercase,
//! stopword removal and suffix stemming.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;

pub const STOPWORDS_VERSION: &str = "stopwords-v1";
pub const STEMMER_VERSION: &str = "stemmer-v1";

static BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords-v1.txt");

/// Suffix rewrites tried in order; the first match applies. A rule only
/// fires when at least `MIN_STEM` characters remain before the suffix.
const SUFFIX_RULES: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("ization", "ize"),
    ("fulness", "ful"),
    ("iveness", "ive"),
    ("ousness", "ous"),
    ("ements", "ement"),
    ("ments", "ment"),
    ("sses", "ss"),
    ("ies", "y"),
    ("edly", ""),
    ("ingly", ""),
    ("ing", ""),
    ("ed", ""),
    ("ly", ""),
    ("s", ""),
];
const MIN_STEM: usize = 3;
const KEEP_FINAL_S: &[&str] = &["ss", "us", "is", "as", "os", "ys"];

pub fn stopwords() -> &'static HashSet<&'static str> {
    static CELL: OnceLock<HashSet<&'static str>> = OnceLock::new();
    CELL.get_or_init(|| {
        BUNDLED_STOPWORDS.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
    })
}

fn url_pattern() -> &'static Regex {
    static CELL: OnceLock<Regex> = OnceLock::new();
    CELL.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid URL pattern"))
}

fn stem_once(word: &str) -> Option<String> {
    for (suffix, replacement) in SUFFIX_RULES {
        let Some(base) = word.strip_suffix(suffix) else {
            continue;
        };
        if base.len() < MIN_STEM {
            return None;
        }
        if *suffix == "s" && KEEP_FINAL_S.iter().any(|k| word.ends_with(k)) {
            return None;
        }
        return Some(format!("{base}{replacement}"));
    }
    None
}

/// Applies the suffix rules until none fires.
pub fn stem(word: &str) -> String {
    let mut current = word.to_string();
    while let Some(next) = stem_once(&current) {
        current = next;
    }
    current
}

/// Lowercase alphabetic tokens with stopwords removed, each stemmed. Stems
/// that collide with a stopword are dropped too, so the output is a fixed
/// point of the pipeline.
pub fn normalize_text(raw: &str) -> Vec<String> {
    let no_urls = url_pattern().replace_all(raw, " ");
    let letters: String = no_urls
        .chars()
        .filter(|c| c.is_ascii_alphabetic() || c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase();
    let stop = stopwords();
    letters
        .split_whitespace()
        .filter(|t| !stop.contains(t))
        .map(stem)
        .filter(|t| !t.is_empty() && !stop.contains(t.as_str()))
        .collect()
}
