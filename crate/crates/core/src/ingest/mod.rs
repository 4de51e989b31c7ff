//! Reply-graph construction from interaction record files (CSV or JSONL
//! with `source_user,target_user,post_id,text` plus optional label columns).

mod text;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeKind, EmotionLabel, Graph, GraphError, NodeId, NodeState, Provenance};
use crate::sentiment::SentimentClassifier;

pub use text::{normalize_text, stem, stopwords, STEMMER_VERSION, STOPWORDS_VERSION};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    /// `.jsonl`/`.ndjson` are JSONL, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jsonl") | Some("ndjson") => RecordFormat::Jsonl,
            _ => RecordFormat::Csv,
        }
    }
}

impl std::str::FromStr for RecordFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RecordFormat::Csv),
            "jsonl" => Ok(RecordFormat::Jsonl),
            other => Err(format!("unknown record format {other:?} (expected csv or jsonl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub source_user: String,
    pub target_user: String,
    pub post_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_label: Option<EmotionLabel>,
    /// Score as written in the file, kept verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_score: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    MissingField,
    EmptyText,
    Duplicate,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::MissingField => "missing field",
            RejectReason::EmptyText => "empty text",
            RejectReason::Duplicate => "duplicate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// Line (CSV: record start line) in the input file.
    pub line: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejectionReport {
    pub missing_field: usize,
    pub empty_text: usize,
    pub duplicate: usize,
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<String>,
}

impl RejectionReport {
    pub fn total(&self) -> usize {
        self.missing_field + self.empty_text + self.duplicate
    }

    fn reject(&mut self, line: usize, reason: RejectReason) {
        match reason {
            RejectReason::MissingField => self.missing_field += 1,
            RejectReason::EmptyText => self.empty_text += 1,
            RejectReason::Duplicate => self.duplicate += 1,
        }
        self.rejections.push(Rejection { line, reason });
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedRecords {
    pub records: Vec<InteractionRecord>,
    pub report: RejectionReport,
}

const REQUIRED: [&str; 4] = ["source_user", "target_user", "post_id", "text"];
const PROCESSED_COLUMNS: [&str; 2] = ["processed", "text_processed"];
const LABEL_COLUMNS: [&str; 3] = ["label", "roberta_label", "vader_label"];
const SCORE_COLUMNS: [&str; 3] = ["score", "roberta_score", "vader_score"];

/// Accepts label names in any case and the `LABEL_0/1/2` convention
/// (negative, neutral, positive).
pub fn parse_external_label(raw: &str) -> Option<EmotionLabel> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "positive" | "pos" | "label_2" => Some(EmotionLabel::Positive),
        "neutral" | "neu" | "label_1" => Some(EmotionLabel::Neutral),
        "negative" | "neg" | "label_0" => Some(EmotionLabel::Negative),
        _ => None,
    }
}

pub fn parse_interaction_records(path: &Path, format: RecordFormat) -> Result<ParsedRecords, IngestError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    parse_interaction_str(&text, format)
}

/// Validates records in input order. Checks run missing field, empty
/// text, then duplicate (identical to an earlier accepted record).
pub fn parse_interaction_str(text: &str, format: RecordFormat) -> Result<ParsedRecords, IngestError> {
    let raw = match format {
        RecordFormat::Csv => read_csv(text)?,
        RecordFormat::Jsonl => read_jsonl(text)?,
    };
    let mut out = ParsedRecords::default();
    let mut seen = HashSet::new();
    for (line, fields) in raw {
        let get = |k: &str| fields.get(k).cloned().flatten();
        let first = |keys: &[&str]| keys.iter().find_map(|k| get(k).filter(|v| !v.trim().is_empty()));
        let required: Vec<Option<String>> = REQUIRED.iter().map(|k| get(k)).collect();
        if required[..3].iter().any(|v| v.as_deref().is_none_or(|s| s.trim().is_empty())) {
            out.report.reject(line, RejectReason::MissingField);
            continue;
        }
        let Some(body) = required[3].clone().filter(|t| !t.trim().is_empty()) else {
            out.report.reject(line, RejectReason::EmptyText);
            continue;
        };
        let external_label = match first(&LABEL_COLUMNS) {
            Some(l) => {
                let parsed = parse_external_label(&l);
                if parsed.is_none() {
                    out.report.warnings.push(format!("line {line}: unrecognised label {l:?} ignored"));
                }
                parsed
            }
            None => None,
        };
        let record = InteractionRecord {
            source_user: required[0].clone().unwrap_or_default().trim().to_string(),
            target_user: required[1].clone().unwrap_or_default().trim().to_string(),
            post_id: required[2].clone().unwrap_or_default().trim().to_string(),
            text: body,
            processed: first(&PROCESSED_COLUMNS),
            external_label,
            external_score: first(&SCORE_COLUMNS).map(|s| s.trim().to_string()),
        };
        if !seen.insert(record.clone()) {
            out.report.reject(line, RejectReason::Duplicate);
            continue;
        }
        out.records.push(record);
    }
    Ok(out)
}

type RawRow = (usize, HashMap<String, Option<String>>);

fn read_csv(text: &str) -> Result<Vec<RawRow>, IngestError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Parse { line: 1, message: e.to_string() })?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    for required in REQUIRED {
        if !headers.iter().any(|h| h == required) {
            return Err(IngestError::Parse { line: 1, message: format!("header lacks required column {required:?}") });
        }
    }
    let mut dup = HashSet::new();
    if let Some(h) = headers.iter().find(|h| !dup.insert(h.as_str())) {
        return Err(IngestError::Parse { line: 1, message: format!("header repeats column {h:?}") });
    }
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            IngestError::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields = headers.iter().cloned().zip(record.iter().map(|v| Some(v.to_string()))).collect();
        rows.push((line, fields));
    }
    Ok(rows)
}

fn read_jsonl(text: &str) -> Result<Vec<RawRow>, IngestError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| IngestError::Parse { line: i + 1, message: e.to_string() })?;
        let obj = value
            .as_object()
            .ok_or_else(|| IngestError::Parse { line: i + 1, message: "expected a JSON object".into() })?;
        let fields = obj
            .iter()
            .map(|(k, v)| {
                let s = match v {
                    serde_json::Value::Null => None,
                    serde_json::Value::String(s) => Some(s.clone()),
                    other => Some(other.to_string()),
                };
                (k.clone(), s)
            })
            .collect();
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Use labels supplied in the file where present instead of classifying.
    pub trust_external: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealGraph {
    pub graph: Graph,
    pub warnings: Vec<String>,
}

/// One node per user (ids by first appearance), one reply edge per record
/// labelled with the sentiment of its raw text. A user's emotion is the
/// label of their latest authored record; receive-only users are neutral.
pub fn build_real_graph(
    records: &[InteractionRecord],
    classifier: &dyn SentimentClassifier,
    options: BuildOptions,
) -> Result<RealGraph, IngestError> {
    let labels: Vec<EmotionLabel> = records
        .iter()
        .map(|r| match (options.trust_external, r.external_label) {
            (true, Some(l)) => l,
            _ => classifier.classify(&r.text).label,
        })
        .collect();

    let mut ids: HashMap<&str, NodeId> = HashMap::new();
    let mut users: Vec<NodeState> = Vec::new();
    fn intern<'a>(name: &'a str, ids: &mut HashMap<&'a str, NodeId>, users: &mut Vec<NodeState>) -> NodeId {
        *ids.entry(name).or_insert_with(|| {
            let id = NodeId(users.len() as u32);
            let mut n = NodeState::new(id);
            n.name = Some(name.to_string());
            users.push(n);
            id
        })
    }
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    for (r, label) in records.iter().zip(&labels) {
        let s = intern(&r.source_user, &mut ids, &mut users);
        let t = intern(&r.target_user, &mut ids, &mut users);
        let author = &mut users[s.0 as usize];
        author.post_frequency += 1;
        author.emotion = *label;
        if s == t {
            warnings.push(format!("self-reply by {:?} in post {:?} skipped", r.source_user, r.post_id));
            continue;
        }
        let mut e = Edge::new(s, t, EdgeKind::Reply).with_label(*label);
        e.text_length = Some(r.text.chars().count() as u32);
        edges.push(e);
    }

    let mut graph = Graph::new(true, Provenance::Real);
    graph.meta.annotations = Some(serde_json::json!({
        "ordering": "input order; the record schema carries no timestamps",
        "normalizer": format!("{STOPWORDS_VERSION}+{STEMMER_VERSION}"),
        "labels": if options.trust_external { "external where present, else lexicon" } else { "lexicon" },
    }));
    for n in users {
        graph.add_node(n)?;
    }
    for e in edges {
        graph.add_edge(e)?;
    }
    Ok(RealGraph { graph, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::reciprocity;
    use crate::sentiment::LexiconClassifier;

    fn csv(body: &str) -> ParsedRecords {
        parse_interaction_str(&format!("source_user,target_user,post_id,text\n{body}"), RecordFormat::Csv).unwrap()
    }

    #[test]
    fn missing_target_is_rejected() {
        let p = csv("alice,,p1,hello there\nalice,bob,p1,hello there\n");
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.report.missing_field, 1);
        assert_eq!(p.report.rejections[0], Rejection { line: 2, reason: RejectReason::MissingField });
        assert_eq!(p.report.rejections[0].reason.as_str(), "missing field");
    }

    #[test]
    fn duplicates_and_empty_text() {
        let p = csv("a,b,p,hi\na,b,p,hi\na,b,p,\"  \"\na,b,q,hi\n");
        assert_eq!(p.records.len(), 2);
        assert_eq!((p.report.duplicate, p.report.empty_text), (1, 1));
        assert_eq!(p.report.rejections[0].line, 3);
    }

    #[test]
    fn empty_file() {
        for fmt in [RecordFormat::Csv, RecordFormat::Jsonl] {
            let p = parse_interaction_str("", fmt).unwrap();
            assert!(p.records.is_empty());
            assert_eq!(p.report, RejectionReport::default());
        }
    }

    #[test]
    fn malformed_inputs_are_fatal_with_line() {
        let e = parse_interaction_str("source_user,target_user,text\na,b,c\n", RecordFormat::Csv).unwrap_err();
        assert!(matches!(e, IngestError::Parse { line: 1, .. }));
        let e = parse_interaction_str("source_user,target_user,post_id,text\na,b,p,t\na,b\n", RecordFormat::Csv)
            .unwrap_err();
        assert!(matches!(e, IngestError::Parse { line: 3, .. }), "{e}");
        let e = parse_interaction_str("{\"source_user\":\"a\"}\n[1]\n", RecordFormat::Jsonl).unwrap_err();
        assert!(matches!(e, IngestError::Parse { line: 2, .. }));
    }

    #[test]
    fn jsonl_and_external_labels() {
        let text = concat!(
            "{\"source_user\":\"WorldNews\",\"target_user\":\"socialist\",\"post_id\":\"ljwh3sq\",",
            "\"text\":\"the meeting is at noon\",\"roberta_label\":\"LABEL_2\",\"roberta_score\":0.5849699378013611}\n",
            "{\"source_user\":\"x\",\"target_user\":null,\"post_id\":\"p\",\"text\":\"t\"}\n"
        );
        let p = parse_interaction_str(text, RecordFormat::Jsonl).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.report.missing_field, 1);
        let r = &p.records[0];
        assert_eq!(r.external_label, Some(EmotionLabel::Positive));
        assert_eq!(r.external_score.as_deref(), Some("0.5849699378013611"));
        let trusting =
            build_real_graph(&p.records, LexiconClassifier::bundled(), BuildOptions { trust_external: true }).unwrap();
        assert_eq!(trusting.graph.edges()[0].label, Some(EmotionLabel::Positive));
        let own = build_real_graph(&p.records, LexiconClassifier::bundled(), BuildOptions::default()).unwrap();
        assert_eq!(own.graph.edges()[0].label, Some(EmotionLabel::Neutral));
    }

    #[test]
    fn single_record_graph() {
        let p = csv("A,B,p,thanks a lot\n");
        let g = build_real_graph(&p.records, LexiconClassifier::bundled(), BuildOptions::default()).unwrap().graph;
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(reciprocity(&g).unwrap(), 0.0);
        assert_eq!(g.node(NodeId(0)).unwrap().name.as_deref(), Some("A"));
        assert_eq!(g.node(NodeId(0)).unwrap().emotion, EmotionLabel::Positive);
        assert_eq!(g.node(NodeId(1)).unwrap().emotion, EmotionLabel::Neutral);
    }

    #[test]
    fn self_replies_skipped_but_counted() {
        let p = csv("A,A,p,awful\nA,B,p,fine thanks\n");
        let r = build_real_graph(&p.records, LexiconClassifier::bundled(), BuildOptions::default()).unwrap();
        assert_eq!(r.graph.edge_count(), 1);
        assert_eq!(r.warnings.len(), 1);
        let a = r.graph.node(NodeId(0)).unwrap();
        assert_eq!(a.post_frequency, 2);
        assert_eq!(a.emotion, EmotionLabel::Positive);
    }

    #[test]
    fn format_from_path() {
        assert_eq!(RecordFormat::from_path(Path::new("x.JSONL")), RecordFormat::Jsonl);
        assert_eq!(RecordFormat::from_path(Path::new("x.csv")), RecordFormat::Csv);
        assert!("xml".parse::<RecordFormat>().is_err());
    }
}
