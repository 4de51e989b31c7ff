//! Two-layer graph convolution for node emotion classification, trained
//! with full-batch gradient descent on analytic gradients.

mod metrics;

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeKind, Graph, GraphError, NodeId};
use crate::rng::rng_from_seed;

pub use metrics::{ClassMetrics, Metrics};

pub const FEATURE_DIM: usize = 5;
pub const NUM_CLASSES: usize = 3;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate task: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("model file: {0}")]
    Model(String),
}

/// Node features, class labels and the id of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    /// Columns: emotion one-hot (positive, neutral, negative), credibility,
    /// post frequency divided by the maximum.
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    pub ids: Vec<NodeId>,
}

/// Rows follow ascending node id. The one-hot block encodes the node's
/// initial emotion when recorded, its label is the current emotion.
pub fn build_features(graph: &Graph) -> Result<Features, LearnError> {
    let n = graph.node_count();
    let max_freq = graph.nodes().map(|n| n.post_frequency).max().unwrap_or(0);
    let mut x = Array2::zeros((n, FEATURE_DIM));
    let mut labels = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for (i, node) in graph.nodes().enumerate() {
        if !node.credibility.is_finite() {
            return Err(LearnError::Contract(format!("node {} has no usable credibility", node.id)));
        }
        x[[i, node.feature_emotion().index()]] = 1.0;
        x[[i, 3]] = node.credibility;
        x[[i, 4]] = if max_freq == 0 { 0.0 } else { f64::from(node.post_frequency) / f64::from(max_freq) };
        labels.push(node.emotion.index());
        ids.push(node.id);
    }
    Ok(Features { x, labels, ids })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    /// `D^-1/2 (A + I) D^-1/2`
    #[default]
    Gcn,
    /// `D^-1 (A + I)`
    MeanAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdjacencyOptions {
    /// Use `multiplier(kind) * weight` instead of 1 per edge.
    pub weighted: bool,
    pub kind_multipliers: BTreeMap<EdgeKind, f64>,
}

impl Default for AdjacencyOptions {
    fn default() -> Self {
        AdjacencyOptions {
            weighted: false,
            kind_multipliers: BTreeMap::from([
                (EdgeKind::Reply, 1.0),
                (EdgeKind::Comment, 1.0),
                (EdgeKind::Mention, 0.8),
            ]),
        }
    }
}

/// Sparse propagation matrix. Every product row sums its terms in sorted
/// order, so relabelling the nodes permutes the output rows bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphOperator {
    rows: Vec<Vec<(usize, f64)>>,
}

fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

impl GraphOperator {
    pub fn new(graph: &Graph, layer: LayerKind, options: &AdjacencyOptions) -> Self {
        let index = graph.index();
        let n = graph.node_count();
        let mut a: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for e in graph.edges() {
            let v = if options.weighted {
                options.kind_multipliers.get(&e.kind).copied().unwrap_or(1.0) * e.weight
            } else {
                1.0
            };
            let (s, t) = (index.of(e.source), index.of(e.target));
            for (i, j) in [(s, t), (t, s)] {
                let slot = a[i].entry(j).or_insert(v);
                *slot = slot.max(v);
            }
        }
        let degree: Vec<f64> = a
            .iter()
            .map(|row| {
                let mut terms: Vec<f64> = row.values().copied().chain([1.0]).collect();
                sorted_sum(&mut terms)
            })
            .collect();
        let rows = a
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.insert(i, 1.0);
                row.into_iter()
                    .map(|(j, v)| {
                        let scaled = match layer {
                            LayerKind::Gcn => v / (degree[i] * degree[j]).sqrt(),
                            LayerKind::MeanAggregate => v / degree[i],
                        };
                        (j, scaled)
                    })
                    .collect()
            })
            .collect();
        GraphOperator { rows }
    }

    /// Nonzero entries of a dense square matrix.
    pub fn from_dense(m: &Array2<f64>) -> Result<Self, LearnError> {
        if m.nrows() != m.ncols() {
            return Err(LearnError::Contract(format!("adjacency is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let rows = m
            .rows()
            .into_iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
            .collect();
        Ok(GraphOperator { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.rows.len();
        let mut m = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[[i, j]] = v;
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v));
            }
        }
        GraphOperator { rows }
    }

    pub fn apply(&self, m: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows.len(), m.ncols()));
        let mut terms = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for c in 0..m.ncols() {
                terms.clear();
                terms.extend(row.iter().map(|&(k, a)| a * m[[k, c]]));
                out[[i, c]] = sorted_sum(&mut terms);
            }
        }
        out
    }
}

/// Dense normalized adjacency `D^-1/2 (A + I) D^-1/2` of the symmetrized
/// graph (max of both directions).
pub fn normalized_adjacency(graph: &Graph, options: &AdjacencyOptions) -> Array2<f64> {
    GraphOperator::new(graph, LayerKind::Gcn, options).to_dense()
}

/// Row-wise product with a fixed summation order per row.
fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                s += a[[i, k]] * b[[k, j]];
            }
            out[[i, j]] = s;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub layer: LayerKind,
    /// `FEATURE_DIM x hidden`
    pub w0: Array2<f64>,
    /// `hidden x NUM_CLASSES`
    pub w1: Array2<f64>,
}

impl GcnParams {
    pub fn zeros(input_dim: usize, hidden: usize, layer: LayerKind) -> Self {
        GcnParams { layer, w0: Array2::zeros((input_dim, hidden)), w1: Array2::zeros((hidden, NUM_CLASSES)) }
    }

    /// Uniform in `±sqrt(6 / (fan_in + fan_out))` per matrix, `w0` first, row-major.
    pub fn glorot(input_dim: usize, hidden: usize, layer: LayerKind, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut draw = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
        };
        let w0 = draw(input_dim, hidden);
        let w1 = draw(hidden, NUM_CLASSES);
        GcnParams { layer, w0, w1 }
    }

    pub fn hidden(&self) -> usize {
        self.w0.ncols()
    }

    fn check(&self, x: &Array2<f64>, op: &GraphOperator) -> Result<(), LearnError> {
        if self.w0.nrows() != x.ncols() {
            return Err(LearnError::Contract(format!(
                "features have {} columns, model expects {}",
                x.ncols(),
                self.w0.nrows()
            )));
        }
        if self.w1.nrows() != self.w0.ncols() || self.w1.ncols() != NUM_CLASSES {
            return Err(LearnError::Contract(format!(
                "weight shapes {:?} and {:?} are inconsistent",
                self.w0.dim(),
                self.w1.dim()
            )));
        }
        if op.len() != x.nrows() {
            return Err(LearnError::Contract(format!("{} feature rows for a {}-node operator", x.nrows(), op.len())));
        }
        Ok(())
    }
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    /// `A X W0` before the nonlinearity.
    pub pre_activation: Array2<f64>,
    pub hidden: Array2<f64>,
    pub logits: Array2<f64>,
}

/// `logits = A relu(A X W0) W1`.
pub fn gcn_forward(params: &GcnParams, x: &Array2<f64>, op: &GraphOperator) -> Result<ForwardPass, LearnError> {
    params.check(x, op)?;
    let pre_activation = op.apply(&matmul(x, &params.w0));
    let hidden = pre_activation.mapv(|v| v.max(0.0));
    let logits = op.apply(&matmul(&hidden, &params.w1));
    Ok(ForwardPass { pre_activation, hidden, logits })
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s: f64 = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
}

/// Mean softmax cross-entropy over the masked rows and its gradients.
pub fn loss_and_gradients(
    params: &GcnParams,
    x: &Array2<f64>,
    op: &GraphOperator,
    labels: &[usize],
    mask: &[bool],
) -> Result<(f64, Gradients), LearnError> {
    let m = mask.iter().filter(|b| **b).count();
    if m == 0 {
        return Err(LearnError::Contract("loss mask selects no nodes".into()));
    }
    if labels.len() != x.nrows() || mask.len() != x.nrows() {
        return Err(LearnError::Contract("labels and mask must have one entry per node".into()));
    }
    let fwd = gcn_forward(params, x, op)?;
    let probs = softmax_rows(&fwd.logits);
    let mut loss = 0.0;
    let mut d_logits = Array2::zeros(probs.dim());
    for i in (0..x.nrows()).filter(|i| mask[*i]) {
        let row = fwd.logits.row(i);
        let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = mx + row.iter().map(|v| (v - mx).exp()).sum::<f64>().ln();
        loss += lse - row[labels[i]];
        for c in 0..NUM_CLASSES {
            d_logits[[i, c]] = (probs[[i, c]] - if c == labels[i] { 1.0 } else { 0.0 }) / m as f64;
        }
    }
    let op_t = op.transpose();
    let d_z1 = op_t.apply(&d_logits);
    let g1 = fwd.hidden.t().dot(&d_z1);
    let mut d_pre = d_z1.dot(&params.w1.t());
    d_pre.zip_mut_with(&fwd.pre_activation, |d, p| {
        if *p <= 0.0 {
            *d = 0.0;
        }
    });
    let d_z0 = op_t.apply(&d_pre);
    let g0 = x.t().dot(&d_z0);
    Ok((loss / m as f64, Gradients { w0: g0, w1: g1 }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub split_seed: u64,
    pub init_seed: u64,
    pub train_fraction: f64,
    pub layer: LayerKind,
    pub adjacency: AdjacencyOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 16,
            lr: 0.05,
            epochs: 200,
            split_seed: 7,
            init_seed: 11,
            train_fraction: 0.7,
            layer: LayerKind::Gcn,
            adjacency: AdjacencyOptions::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.hidden < 1 {
            return Err(LearnError::Argument("hidden size must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(LearnError::Argument(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(LearnError::Argument(format!("train fraction must be in (0, 1), got {}", self.train_fraction)));
        }
        if self.adjacency.kind_multipliers.values().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(LearnError::Argument("edge kind multipliers must be positive".into()));
        }
        Ok(())
    }
}

/// Stratified train mask: each class is shuffled and split separately,
/// keeping at least one node of every class with two or more members on
/// each side.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> Vec<bool> {
    let mut rng = rng_from_seed(seed);
    let mut mask = vec![false; labels.len()];
    for c in 0..NUM_CLASSES {
        let mut members: Vec<usize> = (0..labels.len()).filter(|i| labels[*i] == c).collect();
        members.shuffle(&mut rng);
        let len = members.len();
        let k = match len {
            0 => 0,
            1 => 1,
            _ => ((train_fraction * len as f64).round() as usize).clamp(1, len - 1),
        };
        for &i in &members[..k] {
            mask[i] = true;
        }
    }
    mask
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: GcnParams,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_history: Vec<f64>,
    pub train: Metrics,
    pub test: Metrics,
    pub n_train: usize,
    pub n_test: usize,
    pub split_seed: u64,
    pub init_seed: u64,
    pub config: TrainConfig,
}

pub fn predict(params: &GcnParams, x: &Array2<f64>, op: &GraphOperator) -> Result<Vec<usize>, LearnError> {
    let fwd = gcn_forward(params, x, op)?;
    Ok(fwd
        .logits
        .rows()
        .into_iter()
        .map(|r| (0..NUM_CLASSES).fold(0, |best, c| if r[c] > r[best] { c } else { best }))
        .collect())
}

fn masked_metrics(labels: &[usize], predicted: &[usize], mask: &[bool]) -> Metrics {
    let (t, p): (Vec<usize>, Vec<usize>) =
        (0..labels.len()).filter(|i| mask[*i]).map(|i| (labels[i], predicted[i])).unzip();
    Metrics::from_pairs(&t, &p)
}

pub fn train(graph: &Graph, config: &TrainConfig) -> Result<(TrainReport, TrainedModel), LearnError> {
    config.validate()?;
    let f = build_features(graph)?;
    let present = (0..NUM_CLASSES).filter(|c| f.labels.contains(c)).count();
    if present < 2 {
        return Err(LearnError::Degenerate(format!(
            "graph has {} node(s) covering {present} class(es); at least two classes are needed",
            graph.node_count()
        )));
    }
    let op = GraphOperator::new(graph, config.layer, &config.adjacency);
    let train_mask = stratified_split(&f.labels, config.train_fraction, config.split_seed);
    let test_mask: Vec<bool> = train_mask.iter().map(|b| !b).collect();
    let mut params = GcnParams::glorot(FEATURE_DIM, config.hidden, config.layer, config.init_seed);
    let mut loss_history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, g) = loss_and_gradients(&params, &f.x, &op, &f.labels, &train_mask)?;
        loss_history.push(loss);
        params.w0.scaled_add(-config.lr, &g.w0);
        params.w1.scaled_add(-config.lr, &g.w1);
    }
    let predicted = predict(&params, &f.x, &op)?;
    let report = TrainReport {
        loss_history,
        train: masked_metrics(&f.labels, &predicted, &train_mask),
        test: masked_metrics(&f.labels, &predicted, &test_mask),
        n_train: train_mask.iter().filter(|b| **b).count(),
        n_test: test_mask.iter().filter(|b| **b).count(),
        split_seed: config.split_seed,
        init_seed: config.init_seed,
        config: config.clone(),
    };
    Ok((report, TrainedModel { params, config: config.clone() }))
}

/// Metrics over the masked nodes of `graph` with no refitting.
pub fn evaluate(model: &TrainedModel, graph: &Graph, mask: &[bool]) -> Result<Metrics, LearnError> {
    if mask.len() != graph.node_count() {
        return Err(LearnError::Contract(format!("mask has {} entries for {} nodes", mask.len(), graph.node_count())));
    }
    if !mask.iter().any(|b| *b) {
        return Err(LearnError::Contract("evaluation mask selects no nodes".into()));
    }
    let f = build_features(graph)?;
    let op = GraphOperator::new(graph, model.params.layer, &model.config.adjacency);
    let predicted = predict(&model.params, &f.x, &op)?;
    Ok(masked_metrics(&f.labels, &predicted, mask))
}

/// Applies a model fitted on one graph to every node of another.
pub fn cross_domain_eval(model: &TrainedModel, graph: &Graph) -> Result<Metrics, LearnError> {
    if model.params.w0.nrows() != FEATURE_DIM {
        return Err(LearnError::Contract(format!(
            "model expects {} input features, graphs provide {FEATURE_DIM}",
            model.params.w0.nrows()
        )));
    }
    evaluate(model, graph, &vec![true; graph.node_count()])
}

/// On-disk model: shapes plus row-major weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub tool_version: String,
    pub layer: LayerKind,
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub config: TrainConfig,
    /// Free-form run description written by the command-line tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

const MODEL_FORMAT: &str = "emograph-gcn-v1";

impl TrainedModel {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            layer: self.params.layer,
            input_dim: self.params.w0.nrows(),
            hidden: self.params.w0.ncols(),
            classes: self.params.w1.ncols(),
            w0: self.params.w0.iter().copied().collect(),
            w1: self.params.w1.iter().copied().collect(),
            config: self.config.clone(),
            provenance: None,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self, LearnError> {
        if file.format != MODEL_FORMAT {
            return Err(LearnError::Model(format!("unsupported format {:?}", file.format)));
        }
        let shape_err = |e: ndarray::ShapeError| LearnError::Model(e.to_string());
        let w0 = Array2::from_shape_vec((file.input_dim, file.hidden), file.w0).map_err(shape_err)?;
        let w1 = Array2::from_shape_vec((file.hidden, file.classes), file.w1).map_err(shape_err)?;
        if file.classes != NUM_CLASSES {
            return Err(LearnError::Model(format!("model has {} classes, expected {NUM_CLASSES}", file.classes)));
        }
        if w0.iter().chain(w1.iter()).any(|v| !v.is_finite()) {
            return Err(LearnError::Model("weights must be finite".into()));
        }
        Ok(TrainedModel { params: GcnParams { layer: file.layer, w0, w1 }, config: file.config })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| LearnError::Model(e.to_string()))?;
        Self::from_file(file)
    }
}

#[cfg(test)]
mod tests;
