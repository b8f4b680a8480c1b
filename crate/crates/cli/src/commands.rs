use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use neurochaos::eval::{f1_report, fit_model, SweepOutcome};
use neurochaos::{
    assemble_inputs, evaluate_pipeline, homophily, load_graph, load_nodes, stratified_split,
    ChaosNetModel, Execution, GraphDataset, LoadingStrategy, SearchPlan, TrainingSet,
};

use crate::config::{ConfigError, RunConfig};

fn load(cfg: &RunConfig, strategy: LoadingStrategy) -> Result<GraphDataset> {
    let nodes = cfg.nodes()?;
    Ok(match cfg.edges_for(strategy)? {
        Some(edges) => load_graph(nodes, edges)?.graph,
        None => load_nodes(nodes)?,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn stats(cfg: &RunConfig) -> Result<()> {
    let loaded = load_graph(cfg.nodes()?, cfg.edges()?)?;
    let g = &loaded.graph;
    let report = homophily(g)?;
    let mut text = String::new();
    writeln!(text, "nodes={}", g.num_nodes())?;
    writeln!(text, "features={}", g.num_features())?;
    writeln!(text, "classes={}", g.num_classes())?;
    writeln!(text, "edges={}", report.e_total)?;
    writeln!(
        text,
        "duplicate_edges_dropped={}",
        loaded.stats.duplicate_edges
    )?;
    writeln!(text, "self_loops_dropped={}", loaded.stats.self_loops)?;
    writeln!(text, "e_same={}", report.e_same)?;
    writeln!(text, "e_diff={}", report.e_diff)?;
    writeln!(text, "homophily={:.3}", report.homophily)?;
    writeln!(text, "heterophily={:.3}", report.heterophily)?;
    if let Some(out) = cfg.out.as_deref() {
        emit(Some(out), &text)?;
    }
    print!("{text}");
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let graph = load(cfg, cfg.strategy)?;
    let start = Instant::now();
    let result = evaluate_pipeline(&graph, cfg.strategy, &params, cfg.ratio, cfg.seed)?;
    let elapsed = start.elapsed();

    let mut text = String::new();
    if cfg.timing {
        writeln!(text, "# runtime_secs={:.3}", elapsed.as_secs_f64())?;
    }
    writeln!(text, "strategy={}", result.strategy)?;
    writeln!(text, "q={}", result.params.q)?;
    writeln!(text, "b={}", result.params.b)?;
    writeln!(text, "epsilon={}", result.params.epsilon)?;
    writeln!(text, "max_iters={}", result.params.max_iters)?;
    writeln!(text, "ratio={}", result.ratio)?;
    writeln!(text, "seed={}", result.seed)?;
    writeln!(text, "train_size={}", result.train_size)?;
    writeln!(text, "test_size={}", result.test_size)?;
    writeln!(text, "train_macro_f1={:.6}", result.train_macro_f1)?;
    writeln!(text, "test_macro_f1={:.6}", result.test_macro_f1)?;
    for (c, f1) in result.per_class_test_f1.iter().enumerate() {
        writeln!(text, "test_f1_class_{c}={f1:.6}")?;
    }
    emit(cfg.out.as_deref(), &text)?;
    eprintln!(
        "test_macro_f1={:.6} ({:.2}s)",
        result.test_macro_f1,
        elapsed.as_secs_f64()
    );
    Ok(())
}

pub fn sweep_csv(records: &[&neurochaos::SweepRecord], k: usize) -> String {
    let mut text = String::from("q,b,epsilon,mean_cv_macro_f1");
    for i in 1..=k {
        let _ = write!(text, ",fold_{i}");
    }
    text.push('\n');
    for r in records {
        let _ = write!(
            text,
            "{},{},{},{:.6}",
            r.params.q, r.params.b, r.params.epsilon, r.mean_cv_macro_f1
        );
        for s in &r.per_fold_scores {
            let _ = write!(text, ",{s:.6}");
        }
        text.push('\n');
    }
    text
}

fn describe_stage(name: &str, stage: &SweepOutcome) -> String {
    format!(
        "{name}: {} point(s), best q={} b={} epsilon={} mean_cv_macro_f1={:.6}",
        stage.records.len(),
        stage.best.q,
        stage.best.b,
        stage.best.epsilon,
        stage.best_score
    )
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let plan = cfg.search_plan()?;
    let graph = load(cfg, cfg.strategy)?;
    let split = stratified_split(graph.labels(), cfg.ratio, cfg.seed)?;
    let training = TrainingSet::from_split(&graph, cfg.strategy, &split);
    let cv = neurochaos::eval::CrossValidator::new(&training, cfg.k, cfg.seed)?;
    let outcome = cv.search(&plan, Execution::default())?;

    let records: Vec<_> = outcome.records().collect();
    emit(cfg.out.as_deref(), &sweep_csv(&records, cv.num_folds()))?;

    let names: &[&str] = match plan {
        SearchPlan::Grid(_) => &["grid"],
        SearchPlan::Staged(_) => &["coarse", "fine", "epsilon"],
    };
    for (name, stage) in names.iter().zip(&outcome.stages) {
        eprintln!("{}", describe_stage(name, stage));
    }
    eprintln!(
        "best q={} b={} epsilon={} mean_cv_macro_f1={:.6}",
        outcome.best.q, outcome.best.b, outcome.best.epsilon, outcome.best_score
    );
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let params = cfg.params()?;
    let out = cfg.out()?;
    let graph = load(cfg, cfg.strategy)?;
    let inputs = assemble_inputs(&graph, cfg.strategy);
    let model = fit_model(
        &inputs,
        graph.labels(),
        graph.num_classes(),
        &params,
        cfg.strategy,
        graph.num_features(),
        Execution::default(),
    )?;
    let pred = model.predict(inputs.view())?;
    let report = f1_report(graph.labels(), &pred.labels, graph.num_classes())?;
    model.save(out)?;
    eprintln!(
        "trained on {} nodes; train_macro_f1={:.6}; model written to {}",
        graph.num_nodes(),
        report.macro_f1,
        out.display()
    );
    Ok(())
}

pub fn predict(cfg: &RunConfig) -> Result<()> {
    let model_path = cfg
        .model
        .as_deref()
        .ok_or_else(|| ConfigError("--model is required".into()))?;
    let model = ChaosNetModel::load(model_path)?;
    let graph = load(cfg, model.strategy)?;
    if graph.num_features() != model.input_dim {
        return Err(anyhow::anyhow!(
            "dimensionality mismatch: model expects d={} features per node, {} has d={}",
            model.input_dim,
            cfg.nodes()?.display(),
            graph.num_features()
        ));
    }
    let inputs = assemble_inputs(&graph, model.strategy);
    let pred = model.predict(inputs.view())?;
    let mut text = String::from("id,predicted_label\n");
    for (id, label) in graph.node_ids().iter().zip(&pred.labels) {
        writeln!(text, "{id},{label}")?;
    }
    emit(cfg.out.as_deref(), &text)?;
    if !pred.degenerate_rows.is_empty() {
        eprintln!(
            "warning: {} node(s) produced all-zero chaos features",
            pred.degenerate_rows.len()
        );
    }
    Ok(())
}
