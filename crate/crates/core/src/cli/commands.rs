use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use super::*;
use crate::contagion::{
    positivity_share_by_round, run_llm_diffusion_from, sentiment_transition_matrix, write_llm_trace_jsonl,
    ContagionError, DiffusionProfile, GenerationProvider, HttpConfig, HttpProvider, ProviderError, ScriptedProvider,
};
use crate::graph::{
    deserialize_graph, generate_chain_graphs, generate_er_graph, init_node_attributes, serialize_graph, to_dot,
    top_k_by_degree, Graph, GraphError, GraphSummary,
};
use crate::ingest::{build_real_graph, parse_interaction_str, BuildOptions, IngestError};
use crate::learn::{cross_domain_eval, LearnError, Metrics, TrainedModel};
use crate::propagation::{batch_experiment, render_table, run_simulation, write_trace_jsonl, BatchSummary, SimError};
use crate::sentiment::LexiconClassifier;

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_graph(path: &Path) -> Result<(Input, Graph), CliError> {
    let input = read_input(path)?;
    let graph = deserialize_graph(&input.bytes).map_err(|e| CliError::io(path, e))?;
    Ok((input, graph))
}

/// Puts the provenance block under `provenance` in the graph's annotations,
/// keeping whatever else the producer recorded there.
fn annotate(graph: &mut Graph, provenance: Value) {
    graph.meta.annotations = Some(match graph.meta.annotations.take() {
        Some(Value::Object(mut m)) => {
            m.insert("provenance".into(), provenance);
            Value::Object(m)
        }
        None => json!({ "provenance": provenance }),
        Some(other) => json!({ "provenance": provenance, "producer": other }),
    });
}

fn write_graph(graph: &Graph, out: &Path, dot: Option<&Path>) -> Result<(), CliError> {
    write_output(out, &serialize_graph(graph))?;
    if let Some(dot) = dot {
        let text = format!("// emograph {VERSION}\n{}", to_dot(graph));
        write_output(dot, text.as_bytes())?;
    }
    Ok(())
}

pub(super) fn gen_graph(config: &RunConfig, a: &GenGraphArgs) -> Result<(), CliError> {
    let mut s = config.gen_graph.clone();
    s.seed = a.seed.or(config.seed).unwrap_or(s.seed);
    s.nodes = a.nodes.unwrap_or(s.nodes);
    s.edge_prob = a.edge_prob.unwrap_or(s.edge_prob);
    if a.chains.is_some() {
        s.chains = a.chains;
    }
    s.chain_len = a.chain_len.unwrap_or(s.chain_len);
    if !(0.0..=1.0).contains(&s.edge_prob) {
        return Err(CliError::Usage(format!("--edge-prob must be in [0, 1], got {}", s.edge_prob)));
    }
    let usage = |e: GraphError| CliError::Usage(e.to_string());
    let graph = match s.chains {
        Some(c) => generate_chain_graphs(c, s.chain_len, s.seed),
        None => generate_er_graph(s.nodes, s.edge_prob, s.seed),
    }
    .map_err(usage)?;
    let mut graph = init_node_attributes(graph, &s.emotion_dist, s.seed).map_err(usage)?;
    annotate(&mut graph, provenance("gen-graph", &s, &[]));
    write_graph(&graph, &a.out, a.dot.as_deref())?;
    println!("{}: {} nodes, {} edges", a.out.display(), graph.node_count(), graph.edge_count());
    Ok(())
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Argument(m) => CliError::Usage(m),
        other => runtime(other),
    }
}

pub(super) fn simulate(config: &RunConfig, a: &SimulateArgs) -> Result<(), CliError> {
    let (input, graph) = load_graph(&a.graph)?;
    let mut s = config.simulate.clone();
    if let Some(st) = a.strategy {
        s.params.strategy = st.into();
    }
    s.seed_node = a.seed_node.map(NodeId).unwrap_or(s.seed_node);
    s.rounds = a.rounds.unwrap_or(s.rounds);
    s.rng_seed = a.rng_seed.or(config.seed).unwrap_or(s.rng_seed);
    if !graph.contains(s.seed_node) {
        return Err(CliError::Usage(format!("seed node {} is not in {}", s.seed_node, a.graph.display())));
    }
    let trace = run_simulation(&graph, &s.params, s.seed_node, s.rounds, s.rng_seed).map_err(sim_error)?;
    let text = write_trace_jsonl(&trace, Some(provenance("simulate", &s, &[&input])));
    write_output(&a.out, text.as_bytes())?;
    println!(
        "{}: spread {} over {} rounds, reward {:.3} (spread {:.3}, polarity {:.3}, credibility {:.3})",
        s.params.strategy.display_name(),
        trace.spread(),
        trace.rounds(),
        trace.reward.total,
        trace.reward.r_spread,
        trace.reward.r_polar,
        trace.reward.r_cred
    );
    Ok(())
}

/// `Err` names the first violated link of Random > Theory > eIC on mean
/// spread and on mean reward.
pub fn strategy_ordering(summary: &BatchSummary) -> Result<(), String> {
    let get =
        |s: Strategy| summary.get(s).ok_or_else(|| format!("strategy {} missing from the batch", s.display_name()));
    let (r, t, e) = (get(Strategy::Random)?, get(Strategy::Theory)?, get(Strategy::Eic)?);
    let checks = [
        ("spread", r.avg_spread, t.avg_spread, "Random", "Theory"),
        ("spread", t.avg_spread, e.avg_spread, "Theory", "eIC"),
        ("reward", r.avg_reward, t.avg_reward, "Random", "Theory"),
        ("reward", t.avg_reward, e.avg_reward, "Theory", "eIC"),
    ];
    for (what, hi, lo, a, b) in checks {
        if hi <= lo {
            return Err(format!("mean {what}: {a} {hi:.3} is not above {b} {lo:.3}"));
        }
    }
    Ok(())
}

pub(super) fn batch(config: &RunConfig, a: &BatchArgs) -> Result<(), CliError> {
    let mut s = config.batch.clone();
    s.runs = a.runs.unwrap_or(s.runs);
    s.parallel |= a.parallel;
    let x = &mut s.experiment;
    x.master_seed = a.seed.or(config.seed).unwrap_or(x.master_seed);
    x.generator.nodes = a.nodes.unwrap_or(x.generator.nodes);
    x.generator.edge_prob = a.edge_prob.unwrap_or(x.generator.edge_prob);
    x.max_rounds = a.rounds.unwrap_or(x.max_rounds);
    x.parallel = s.parallel;
    if s.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&x.generator.edge_prob) {
        return Err(CliError::Usage(format!("--edge-prob must be in [0, 1], got {}", x.generator.edge_prob)));
    }
    let summary = batch_experiment(&s.experiment, s.runs).map_err(sim_error)?;
    let table = render_table(&summary);
    print!("{table}");
    let prov = provenance("batch", &s, &[]);
    if let Some(out) = &a.out {
        write_json(out, &json!({ "provenance": prov, "summary": summary }))?;
    }
    if let Some(path) = &a.table {
        let text = format!("# emograph {VERSION} batch {}\n{table}", serde_json::to_string(&prov["config"]).unwrap());
        write_output(path, text.as_bytes())?;
    }
    if a.assert_ordering {
        strategy_ordering(&summary).map_err(CliError::Assertion)?;
        println!("ordering holds: Random > Theory > eIC on mean spread and mean reward");
    }
    Ok(())
}

fn contagion_error(e: ContagionError) -> CliError {
    match e {
        ContagionError::Argument(m) => CliError::Usage(m),
        ContagionError::Provider(ProviderError::Config(m)) => CliError::Config(m),
        other => runtime(other),
    }
}

fn roots(graph: &Graph) -> Vec<NodeId> {
    let mut has_parent = std::collections::HashSet::new();
    for e in graph.edges() {
        has_parent.insert(e.target);
    }
    graph.node_ids().into_iter().filter(|id| !has_parent.contains(id)).collect()
}

pub(super) fn llm_diffuse(config: &RunConfig, a: &LlmDiffuseArgs) -> Result<(), CliError> {
    let (graph_input, graph) = load_graph(&a.graph)?;
    let mut s = config.llm_diffuse.clone();
    s.provider = a.provider.unwrap_or(s.provider);
    if a.script.is_some() {
        s.script = a.script.clone();
    }
    s.model = a.model.clone().unwrap_or(s.model);
    if !a.seed_node.is_empty() {
        s.seed_nodes = a.seed_node.iter().copied().map(NodeId).collect();
        s.seed_roots = false;
    }
    s.seed_roots |= a.seed_roots;
    s.run.rounds = a.rounds.unwrap_or(s.run.rounds);
    if let Some(t) = a.tone {
        s.run.tone_policy = t.policy();
    }
    s.run.max_in_flight = a.max_in_flight.unwrap_or(s.run.max_in_flight);
    s.rng_seed = a.rng_seed.or(config.seed).unwrap_or(s.rng_seed);
    s.persona.persona_weight = a.persona_weight.unwrap_or(s.persona.persona_weight);
    s.persona.positivity_bias = a.positivity_bias.unwrap_or(s.persona.positivity_bias);
    if s.run.rounds < 1 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    for (name, p) in [("persona weight", s.persona.persona_weight), ("positivity bias", s.persona.positivity_bias)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::Usage(format!("{name} must be in [0, 1], got {p}")));
        }
    }
    let seeds = if s.seed_roots {
        if !graph.directed() {
            return Err(CliError::Usage("--seed-roots needs a directed graph".into()));
        }
        roots(&graph)
    } else {
        s.seed_nodes.clone()
    };

    let mut inputs = vec![graph_input];
    let provider: Box<dyn GenerationProvider> = match s.provider {
        ProviderKind::Mock => {
            let path = s.script.clone().ok_or_else(|| CliError::Config("the mock provider needs --script".into()))?;
            let script = read_input(&path)?;
            let text = String::from_utf8(script.bytes.clone()).map_err(|e| CliError::io(&path, e))?;
            let provider = ScriptedProvider::from_jsonl(&text).map_err(|e| CliError::io(&path, e))?;
            inputs.push(script);
            Box::new(provider)
        }
        ProviderKind::Http => {
            let http = HttpConfig::from_env(&s.model).map_err(|e| CliError::Config(e.to_string()))?;
            Box::new(HttpProvider::new(http).map_err(|e| CliError::Config(e.to_string()))?)
        }
        ProviderKind::Persona => Box::new(s.persona),
    };

    let trace =
        run_llm_diffusion_from(&graph, &seeds, &s.run, provider.as_ref(), s.rng_seed).map_err(contagion_error)?;
    let input_refs: Vec<&Input> = inputs.iter().collect();
    let prov = provenance("llm-diffuse", &s, &input_refs);

    let mut out_graph = trace.graph.clone();
    annotate(&mut out_graph, prov.clone());
    write_graph(&out_graph, &a.out_dir.join("graph.json"), a.dot.as_deref())?;
    write_output(&a.out_dir.join("trace.jsonl"), write_llm_trace_jsonl(&trace, Some(prov.clone())).as_bytes())?;

    let shares = if trace.records.is_empty() {
        Default::default()
    } else {
        positivity_share_by_round(&trace).map_err(runtime)?
    };
    let transitions = sentiment_transition_matrix(&trace);
    let summary = GraphSummary::of(&trace.graph);
    let report = json!({
        "provenance": prov,
        "replies": trace.records.len(),
        "failures": trace.failures.len(),
        "diagnostics": trace.diagnostics,
        "shares_by_round": shares,
        "transition_matrix": transitions,
        "profile": DiffusionProfile::of(&trace),
        "graph": summary,
    });
    write_json(&a.out_dir.join("report.json"), &report)?;

    for (round, sh) in &shares {
        let n = trace.records_in_round(*round).count();
        println!(
            "round {round}: {n} replies, positive {:.1}%, neutral {:.1}%, negative {:.1}%",
            100.0 * sh.positive,
            100.0 * sh.neutral,
            100.0 * sh.negative
        );
    }
    if !trace.failures.is_empty() {
        println!("{} replies failed", trace.failures.len());
    }
    for d in &trace.diagnostics {
        eprintln!("warning: {d}");
    }
    println!(
        "diffusion graph: {} nodes, {} edges, reciprocity {}",
        out_graph.node_count(),
        out_graph.edge_count(),
        summary.reciprocity.map_or("n/a".into(), |r| format!("{r:.3}"))
    );
    Ok(())
}

pub(super) fn ingest(config: &RunConfig, a: &IngestArgs) -> Result<(), CliError> {
    let input = read_input(&a.input)?;
    let mut s = config.ingest.clone();
    if a.format.is_some() {
        s.format = a.format;
    }
    s.trust_external |= a.trust_external;
    let format = s.format.unwrap_or_else(|| RecordFormat::from_path(&a.input));
    let text = std::str::from_utf8(&input.bytes).map_err(|e| CliError::io(&a.input, e))?;
    let parsed = parse_interaction_str(text, format).map_err(|e| CliError::io(&a.input, e))?;
    let built = build_real_graph(
        &parsed.records,
        LexiconClassifier::bundled(),
        BuildOptions { trust_external: s.trust_external },
    )
    .map_err(|e| match e {
        IngestError::Graph(g) => runtime(g),
        other => CliError::io(&a.input, other),
    })?;
    let mut graph = built.graph;
    let prov = provenance("ingest", &json!({ "format": format, "trust_external": s.trust_external }), &[&input]);
    annotate(&mut graph, prov.clone());
    write_graph(&graph, &a.out, a.dot.as_deref())?;
    if let Some(path) = &a.report {
        write_json(
            path,
            &json!({
                "provenance": prov,
                "accepted": parsed.records.len(),
                "rejected": parsed.report,
                "build_warnings": built.warnings,
            }),
        )?;
    }
    let r = &parsed.report;
    println!(
        "{}: {} records accepted, {} rejected (missing field {}, empty text {}, duplicate {})",
        a.input.display(),
        parsed.records.len(),
        r.total(),
        r.missing_field,
        r.empty_text,
        r.duplicate
    );
    for w in r.warnings.iter().chain(&built.warnings) {
        eprintln!("warning: {w}");
    }
    println!("{}: {} nodes, {} edges", a.out.display(), graph.node_count(), graph.edge_count());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.4}"))
}

/// Metric rows shared by `metrics` and `compare`.
fn metric_rows(s: &GraphSummary) -> Vec<(&'static str, String)> {
    vec![
        ("nodes", s.degree.node_count.to_string()),
        ("edges", s.degree.edge_count.to_string()),
        ("directed", s.directed.to_string()),
        ("average degree", format!("{:.4}", s.degree.average_degree)),
        ("max degree", s.degree.max_degree.to_string()),
        ("clustering", format!("{:.4}", s.clustering)),
        ("reciprocity", fmt_opt(s.reciprocity)),
        ("components", s.components.to_string()),
    ]
}

pub(super) fn metrics(a: &MetricsArgs) -> Result<(), CliError> {
    let (input, graph) = load_graph(&a.graph)?;
    let summary = GraphSummary::of(&graph);
    for (k, v) in metric_rows(&summary) {
        println!("{k:<16}{v:>12}");
    }
    if let Some(out) = &a.out {
        write_json(out, &json!({ "provenance": provenance("metrics", &json!({}), &[&input]), "summary": summary }))?;
    }
    Ok(())
}

/// Human-readable notes on where the two graphs differ in kind.
fn structural_contrasts(a: &GraphSummary, b: &GraphSummary) -> Vec<String> {
    let mut notes = Vec::new();
    let mut zero_vs_positive = |what: &str, x: f64, y: f64| {
        if x == 0.0 && y > 0.0 {
            notes.push(format!("{what}: a is 0, b is {y:.4}"));
        } else if y == 0.0 && x > 0.0 {
            notes.push(format!("{what}: a is {x:.4}, b is 0"));
        }
    };
    zero_vs_positive("clustering", a.clustering, b.clustering);
    if let (Some(x), Some(y)) = (a.reciprocity, b.reciprocity) {
        zero_vs_positive("reciprocity", x, y);
    }
    notes
}

pub(super) fn compare(config: &RunConfig, a: &CompareArgs) -> Result<(), CliError> {
    let (in_a, ga) = load_graph(&a.graph_a)?;
    let (in_b, gb) = load_graph(&a.graph_b)?;
    let mut s = config.compare.clone();
    s.top_k = a.top_k.unwrap_or(s.top_k);
    if s.top_k == 0 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    let (sa, sb) = (GraphSummary::of(&ga), GraphSummary::of(&gb));
    let (ta, tb) = (top_k_by_degree(&ga, s.top_k), top_k_by_degree(&gb, s.top_k));
    let (sta, stb) = (GraphSummary::of(&ta), GraphSummary::of(&tb));
    let contrasts = structural_contrasts(&sa, &sb);

    let mut table = String::new();
    writeln!(
        table,
        "{:<16}{:>12}{:>12}{:>14}{:>14}",
        "metric",
        "a",
        "b",
        format!("a top-{}", s.top_k),
        format!("b top-{}", s.top_k)
    )
    .unwrap();
    let rows = [metric_rows(&sa), metric_rows(&sb), metric_rows(&sta), metric_rows(&stb)];
    for (i, (name, a)) in rows[0].iter().enumerate() {
        writeln!(table, "{:<16}{:>12}{:>12}{:>14}{:>14}", name, a, rows[1][i].1, rows[2][i].1, rows[3][i].1).unwrap();
    }
    print!("{table}");
    for c in &contrasts {
        println!("contrast: {c}");
    }

    let prov = provenance("compare", &s, &[&in_a, &in_b]);
    if let Some(dir) = &a.subgraph_dir {
        for (name, mut g) in [("top-a.json", ta), ("top-b.json", tb)] {
            annotate(&mut g, prov.clone());
            write_output(&dir.join(name), &serialize_graph(&g))?;
        }
    }
    if let Some(out) = &a.out {
        write_json(
            out,
            &json!({
                "provenance": prov,
                "a": sa,
                "b": sb,
                "top_k": s.top_k,
                "top_k_a": sta,
                "top_k_b": stb,
                "contrasts": contrasts,
            }),
        )?;
    }
    Ok(())
}

fn learn_error(e: LearnError) -> CliError {
    match e {
        LearnError::Degenerate(m) => CliError::Degenerate(format!("refusing to train: {m}")),
        LearnError::Argument(m) => CliError::Usage(m),
        other => runtime(other),
    }
}

fn print_metrics(name: &str, m: &Metrics) {
    println!("{name}: accuracy {:.3}, macro-F1 {:.3} over {} nodes", m.accuracy, m.macro_f1, m.evaluated);
    for (label, c) in EmotionLabel::ALL.iter().zip(&m.per_class) {
        println!(
            "  {:<9} precision {:.3} recall {:.3} F1 {:.3} support {}",
            label.as_str(),
            c.precision,
            c.recall,
            c.f1,
            c.support
        );
    }
}

pub(super) fn train(config: &RunConfig, a: &TrainArgs) -> Result<(), CliError> {
    let (input, graph) = load_graph(&a.graph)?;
    let mut s = config.train.clone();
    s.hidden = a.hidden.unwrap_or(s.hidden);
    s.lr = a.lr.unwrap_or(s.lr);
    s.epochs = a.epochs.unwrap_or(s.epochs);
    s.split_seed = a.split_seed.unwrap_or(s.split_seed);
    s.init_seed = a.init_seed.unwrap_or(s.init_seed);
    s.train_fraction = a.train_fraction.unwrap_or(s.train_fraction);
    s.layer = a.layer.map(LayerKind::from).unwrap_or(s.layer);
    s.adjacency.weighted |= a.weighted;
    let (report, model) = crate::learn::train(&graph, &s).map_err(learn_error)?;
    let prov = provenance("train", &s, &[&input]);

    print_metrics("train", &report.train);
    print_metrics("test", &report.test);
    print!("{}", report.test.confusion_table());
    if let (Some(first), Some(last)) = (report.loss_history.first(), report.loss_history.last()) {
        println!("loss {first:.4} -> {last:.4} over {} epochs", report.loss_history.len());
    }
    if let Some(path) = &a.model_out {
        let mut file = model.to_file();
        file.provenance = Some(prov.clone());
        let mut bytes = serde_json::to_vec_pretty(&file).expect("model serializes");
        bytes.push(b'\n');
        write_output(path, &bytes)?;
    }
    if let Some(path) = &a.report {
        write_json(
            path,
            &json!({ "provenance": prov, "report": report, "confusion_table": report.test.confusion_table() }),
        )?;
    }
    Ok(())
}

pub(super) fn cross_eval(a: &CrossEvalArgs) -> Result<(), CliError> {
    let model_input = read_input(&a.model)?;
    let text = std::str::from_utf8(&model_input.bytes).map_err(|e| CliError::io(&a.model, e))?;
    let model = TrainedModel::from_json(text).map_err(|e| CliError::io(&a.model, e))?;
    let (graph_input, graph) = load_graph(&a.graph)?;
    let metrics = cross_domain_eval(&model, &graph).map_err(learn_error)?;
    print_metrics("cross-domain", &metrics);
    print!("{}", metrics.confusion_table());
    if let Some(path) = &a.report {
        let prov = provenance("cross-eval", &json!({}), &[&model_input, &graph_input]);
        write_json(
            path,
            &json!({ "provenance": prov, "metrics": metrics, "confusion_table": metrics.confusion_table() }),
        )?;
    }
    Ok(())
}
