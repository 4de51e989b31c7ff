use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::EmotionLabel;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Indexed positive, neutral, negative.
    pub per_class: [ClassMetrics; 3],
    pub macro_f1: f64,
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; 3]; 3],
    pub evaluated: usize,
}

impl Metrics {
    /// Precision is 0 for a class never predicted, recall 0 for a class
    /// with no support, and F1 0 whenever precision + recall is 0.
    pub fn from_pairs(truth: &[usize], predicted: &[usize]) -> Self {
        assert_eq!(truth.len(), predicted.len(), "truth and predictions differ in length");
        let mut confusion = [[0usize; 3]; 3];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[*t][*p] += 1;
        }
        let n = truth.len();
        let correct: usize = (0..3).map(|c| confusion[c][c]).sum();
        let mut per_class = [ClassMetrics::default(); 3];
        for (c, m) in per_class.iter_mut().enumerate() {
            let tp = confusion[c][c] as f64;
            let predicted_c: usize = (0..3).map(|t| confusion[t][c]).sum();
            let support: usize = confusion[c].iter().sum();
            let precision = if predicted_c == 0 { 0.0 } else { tp / predicted_c as f64 };
            let recall = if support == 0 { 0.0 } else { tp / support as f64 };
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            *m = ClassMetrics { precision, recall, f1, support };
        }
        Metrics {
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / 3.0,
            per_class,
            confusion,
            evaluated: n,
        }
    }

    pub fn class(&self, label: EmotionLabel) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    /// Plain-text confusion matrix, rows are true labels.
    pub fn confusion_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<10}{:>10}{:>10}{:>10}", "true\\pred", "positive", "neutral", "negative").unwrap();
        for (label, row) in EmotionLabel::ALL.iter().zip(&self.confusion) {
            writeln!(out, "{:<10}{:>10}{:>10}{:>10}", label.as_str(), row[0], row[1], row[2]).unwrap();
        }
        out
    }
}
