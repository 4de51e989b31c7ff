use super::*;
use crate::graph::{generate_er_graph, init_node_attributes, Edge, EmotionLabel, NodeState, Provenance};
use proptest::prelude::*;

fn six_node_fixture() -> Graph {
    let mut g = Graph::new(true, Provenance::Real);
    let emotions = [
        EmotionLabel::Positive,
        EmotionLabel::Neutral,
        EmotionLabel::Negative,
        EmotionLabel::Positive,
        EmotionLabel::Negative,
        EmotionLabel::Neutral,
    ];
    for (i, e) in emotions.iter().enumerate() {
        let mut n = NodeState::new(i as u32).with_emotion(*e).with_credibility(0.1 + 0.15 * i as f64);
        n.post_frequency = [3, 1, 4, 1, 5, 9][i];
        g.add_node(n).unwrap();
    }
    for (s, t, k, w) in [
        (0u32, 1u32, EdgeKind::Reply, 1.0),
        (1, 2, EdgeKind::Comment, 2.0),
        (2, 0, EdgeKind::Mention, 1.0),
        (3, 4, EdgeKind::Reply, 0.5),
        (4, 5, EdgeKind::Reply, 1.5),
        (5, 3, EdgeKind::Comment, 1.0),
        (2, 3, EdgeKind::Reply, 1.0),
        (1, 0, EdgeKind::Reply, 3.0),
    ] {
        g.add_edge(Edge::new(s, t, k).with_weight(w)).unwrap();
    }
    g
}

fn weighted() -> AdjacencyOptions {
    AdjacencyOptions { weighted: true, ..Default::default() }
}

#[test]
fn feature_shapes_and_scaling() {
    let mut g = Graph::new(false, Provenance::Synthetic);
    for i in 0..3u32 {
        let mut n = NodeState::new(i);
        n.post_frequency = i * 2;
        g.add_node(n).unwrap();
    }
    let f = build_features(&g).unwrap();
    assert_eq!(f.x.dim(), (3, FEATURE_DIM));
    assert_eq!(f.x[[2, 4]], 1.0);
    assert_eq!(f.x[[1, 4]], 0.5);
    let onehot: Vec<Vec<f64>> = (0..3).map(|i| f.x.row(i).iter().take(3).copied().collect()).collect();
    assert!(onehot.iter().all(|r| *r == vec![0.0, 1.0, 0.0]));
    assert_eq!(f.labels, vec![1, 1, 1]);
}

#[test]
fn initial_emotion_drives_features_and_final_emotion_the_label() {
    let mut g = Graph::new(false, Provenance::LlmSim);
    let mut n = NodeState::new(0u32).with_emotion(EmotionLabel::Positive);
    n.initial_emotion = Some(EmotionLabel::Negative);
    g.add_node(n).unwrap();
    let f = build_features(&g).unwrap();
    assert_eq!(f.x.row(0).to_vec()[..3], [0.0, 0.0, 1.0]);
    assert_eq!(f.labels, vec![0]);
}

#[test]
fn adjacency_small_cases() {
    let mut g = Graph::new(false, Provenance::Synthetic);
    g.add_node(NodeState::new(0u32)).unwrap();
    assert_eq!(normalized_adjacency(&g, &AdjacencyOptions::default()), ndarray::arr2(&[[1.0]]));
    g.add_node(NodeState::new(1u32)).unwrap();
    g.add_edge(Edge::new(0u32, 1u32, EdgeKind::Reply)).unwrap();
    assert_eq!(normalized_adjacency(&g, &AdjacencyOptions::default()), ndarray::arr2(&[[0.5, 0.5], [0.5, 0.5]]));
}

#[test]
fn unweighted_adjacency_depends_only_on_skeleton() {
    let g = six_node_fixture();
    let mut flipped = Graph::new(true, Provenance::Real);
    for n in g.nodes() {
        flipped.add_node(n.clone()).unwrap();
    }
    for e in g.edges() {
        flipped.add_edge(Edge::new(e.target, e.source, EdgeKind::Mention).with_weight(7.0)).unwrap();
    }
    let opts = AdjacencyOptions::default();
    assert_eq!(normalized_adjacency(&g, &opts), normalized_adjacency(&flipped, &opts));
    assert_ne!(normalized_adjacency(&g, &weighted()), normalized_adjacency(&flipped, &weighted()));
}

#[test]
fn mean_aggregate_rows_sum_to_one() {
    let op = GraphOperator::new(&six_node_fixture(), LayerKind::MeanAggregate, &weighted());
    for row in op.to_dense().rows() {
        assert!((row.sum() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_weights_give_uniform_softmax_and_ln3_loss() {
    let g = six_node_fixture();
    let f = build_features(&g).unwrap();
    let op = GraphOperator::new(&g, LayerKind::Gcn, &AdjacencyOptions::default());
    let params = GcnParams::zeros(FEATURE_DIM, 4, LayerKind::Gcn);
    let fwd = gcn_forward(&params, &f.x, &op).unwrap();
    assert!(fwd.logits.iter().all(|v| *v == 0.0));
    assert!(softmax_rows(&fwd.logits).iter().all(|p| (*p - 1.0 / 3.0).abs() < 1e-15));
    let (loss, _) = loss_and_gradients(&params, &f.x, &op, &f.labels, &[true; 6]).unwrap();
    assert!((loss - 3f64.ln()).abs() < 1e-9);
}

#[test]
fn single_node_reduces_to_two_products() {
    let mut g = Graph::new(false, Provenance::Synthetic);
    g.add_node(NodeState::new(0u32).with_credibility(0.3)).unwrap();
    let f = build_features(&g).unwrap();
    let op = GraphOperator::new(&g, LayerKind::Gcn, &AdjacencyOptions::default());
    let p = GcnParams::glorot(FEATURE_DIM, 3, LayerKind::Gcn, 5);
    let fwd = gcn_forward(&p, &f.x, &op).unwrap();
    let expected = f.x.dot(&p.w0).mapv(|v: f64| v.max(0.0)).dot(&p.w1);
    for (a, b) in fwd.logits.iter().zip(expected.iter()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn shape_mismatch_is_contract_error() {
    let g = six_node_fixture();
    let f = build_features(&g).unwrap();
    let op = GraphOperator::new(&g, LayerKind::Gcn, &AdjacencyOptions::default());
    let bad = GcnParams::zeros(4, 8, LayerKind::Gcn);
    assert!(matches!(gcn_forward(&bad, &f.x, &op), Err(LearnError::Contract(_))));
    let good = GcnParams::zeros(FEATURE_DIM, 8, LayerKind::Gcn);
    assert!(matches!(loss_and_gradients(&good, &f.x, &op, &f.labels, &[false; 6]), Err(LearnError::Contract(_))));
}

/// Largest `|analytic - central| / max(1, |central|)` over every weight.
pub(crate) fn gradient_check_error(g: &Graph, layer: LayerKind, seed: u64) -> f64 {
    let f = build_features(g).unwrap();
    let op = GraphOperator::new(g, layer, &weighted());
    let params = GcnParams::glorot(FEATURE_DIM, 4, layer, seed);
    let mask = [true, true, false, true, true, true];
    let (_, grads) = loss_and_gradients(&params, &f.x, &op, &f.labels, &mask).unwrap();
    let eps = 1e-5;
    let loss_at = |p: &GcnParams| loss_and_gradients(p, &f.x, &op, &f.labels, &mask).unwrap().0;
    let mut worst: f64 = 0.0;
    for which in 0..2 {
        let (rows, cols) = if which == 0 { params.w0.dim() } else { params.w1.dim() };
        for r in 0..rows {
            for c in 0..cols {
                let mut plus = params.clone();
                let mut minus = params.clone();
                let (wp, wm, analytic) = if which == 0 {
                    (&mut plus.w0, &mut minus.w0, grads.w0[[r, c]])
                } else {
                    (&mut plus.w1, &mut minus.w1, grads.w1[[r, c]])
                };
                wp[[r, c]] += eps;
                wm[[r, c]] -= eps;
                let central = (loss_at(&plus) - loss_at(&minus)) / (2.0 * eps);
                worst = worst.max((analytic - central).abs() / central.abs().max(1.0));
            }
        }
    }
    worst
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let g = six_node_fixture();
    for layer in [LayerKind::Gcn, LayerKind::MeanAggregate] {
        for seed in 0..5 {
            let err = gradient_check_error(&g, layer, seed);
            assert!(err <= 1e-4, "{layer:?} seed {seed}: {err}");
        }
    }
}

/// Relabels node `i` as `perm[i]`, keeping attributes and edges.
pub(crate) fn permuted(g: &Graph, perm: &[u32]) -> Graph {
    let mut out = Graph::new(g.directed(), g.meta.provenance);
    for n in g.nodes() {
        let mut m = n.clone();
        m.id = NodeId(perm[n.id.0 as usize]);
        out.add_node(m).unwrap();
    }
    for e in g.edges() {
        let mut e2 = e.clone();
        e2.source = NodeId(perm[e.source.0 as usize]);
        e2.target = NodeId(perm[e.target.0 as usize]);
        out.add_edge(e2).unwrap();
    }
    out
}

#[test]
fn split_is_stratified_and_seeded() {
    let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let a = stratified_split(&labels, 0.7, 1);
    assert_eq!(a, stratified_split(&labels, 0.7, 1));
    for c in 0..3 {
        assert_eq!((0..30).filter(|i| labels[*i] == c && a[*i]).count(), 7);
    }
    let small = stratified_split(&[0, 1, 1], 0.7, 0);
    assert!(small[0]);
    assert!(small[1] != small[2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjacency_symmetric_nonnegative(gseed in any::<u64>(), p in 0.0f64..0.6) {
        let g = generate_er_graph(12, p, gseed).unwrap();
        let a = normalized_adjacency(&g, &weighted());
        prop_assert_eq!(&a, &a.t().to_owned());
        prop_assert!(a.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn logits_finite_softmax_normalized(gseed in any::<u64>(), wseed in any::<u64>(), hidden in 1usize..10) {
        let g = init_node_attributes(generate_er_graph(15, 0.2, gseed).unwrap(), &Default::default(), gseed).unwrap();
        let f = build_features(&g).unwrap();
        let op = GraphOperator::new(&g, LayerKind::Gcn, &AdjacencyOptions::default());
        let p = GcnParams::glorot(FEATURE_DIM, hidden, LayerKind::Gcn, wseed);
        let fwd = gcn_forward(&p, &f.x, &op).unwrap();
        prop_assert_eq!(fwd.logits.dim(), (15, NUM_CLASSES));
        prop_assert!(fwd.logits.iter().all(|v| v.is_finite()));
        for row in softmax_rows(&fwd.logits).rows() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
        }
        let (loss, _) = loss_and_gradients(&p, &f.x, &op, &f.labels, &[true; 15]).unwrap();
        prop_assert!(loss >= 0.0);
    }

    #[test]
    fn permutation_equivariance(gseed in any::<u64>(), wseed in any::<u64>(), shuffle_seed in any::<u64>()) {
        let g = init_node_attributes(generate_er_graph(14, 0.3, gseed).unwrap(), &Default::default(), gseed).unwrap();
        let mut perm: Vec<u32> = (0..14).collect();
        perm.shuffle(&mut rng_from_seed(shuffle_seed));
        let h = permuted(&g, &perm);
        for layer in [LayerKind::Gcn, LayerKind::MeanAggregate] {
            let p = GcnParams::glorot(FEATURE_DIM, 6, layer, wseed);
            let la = gcn_forward(&p, &build_features(&g).unwrap().x, &GraphOperator::new(&g, layer, &weighted())).unwrap().logits;
            let lb = gcn_forward(&p, &build_features(&h).unwrap().x, &GraphOperator::new(&h, layer, &weighted())).unwrap().logits;
            for i in 0..14 {
                let j = perm[i] as usize;
                for c in 0..NUM_CLASSES {
                    prop_assert_eq!(la[[i, c]].to_bits(), lb[[j, c]].to_bits());
                }
            }
        }
    }
}

/// Three 20-node rings, one per class; labels equal the one-hot feature.
#[test]
fn separable_planted_graph_is_learned() {
    let (report, _) = train(&crate::scenarios::planted_label_graph(), &TrainConfig::default()).unwrap();
    assert!(report.test.accuracy >= 0.95, "{:?}", report.test);
    assert_eq!(report.n_train + report.n_test, 60);
}

#[test]
fn loss_decreases_early() {
    for lr in [0.01, 0.05] {
        let config = TrainConfig { lr, epochs: 10, ..Default::default() };
        let (report, _) = train(&six_node_fixture(), &config).unwrap();
        let h = &report.loss_history;
        assert!(h.windows(2).all(|w| w[1] < w[0]), "lr {lr}: {h:?}");
    }
}

#[test]
fn single_class_graph_is_refused() {
    let mut g = Graph::new(false, Provenance::Synthetic);
    for i in 0..5u32 {
        g.add_node(NodeState::new(i)).unwrap();
    }
    assert!(matches!(train(&g, &TrainConfig::default()), Err(LearnError::Degenerate(_))));
}

#[test]
fn training_is_deterministic_and_model_round_trips() {
    let g = init_node_attributes(generate_er_graph(40, 0.1, 3).unwrap(), &Default::default(), 4).unwrap();
    let config = TrainConfig { epochs: 30, ..Default::default() };
    let (ra, ma) = train(&g, &config).unwrap();
    let (rb, mb) = train(&g, &config).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(ma, mb);
    let back = TrainedModel::from_json(&ma.to_json()).unwrap();
    assert_eq!(back, ma);
    assert_eq!(back.to_json(), ma.to_json());
}

#[test]
fn cross_eval_on_own_graph_matches_full_mask_eval() {
    let g = crate::scenarios::planted_label_graph();
    let (_, model) = train(&g, &TrainConfig { epochs: 50, ..Default::default() }).unwrap();
    let full = evaluate(&model, &g, &[true; 60]).unwrap();
    let cross = cross_domain_eval(&model, &g).unwrap();
    assert_eq!(full, cross);
    let other = six_node_fixture();
    let m = cross_domain_eval(&model, &other).unwrap();
    assert!([m.accuracy, m.macro_f1].iter().all(|v| (0.0..=1.0).contains(v)));
    let mut narrow = model.clone();
    narrow.params = GcnParams::zeros(4, 16, LayerKind::Gcn);
    assert!(matches!(cross_domain_eval(&narrow, &g), Err(LearnError::Contract(_))));
}
