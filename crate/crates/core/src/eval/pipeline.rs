use ndarray::{Array2, Axis};

use super::metrics::f1_report;
use super::search::{CrossValidator, SearchOutcome, SearchPlan, TrainingSet};
use super::split::{stratified_split, SplitPlan};
use crate::chaos::{transform_matrix_with, GlsParams};
use crate::classifier::{ChaosNetModel, ClassPrototypes, Normalizer};
use crate::error::Result;
use crate::exec::Execution;
use crate::graph::{assemble_inputs, GraphDataset, LoadingStrategy};

/// Scores of one fixed-parameter train/test run.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub strategy: LoadingStrategy,
    pub params: GlsParams,
    /// Resubstitution score on the training rows.
    pub train_macro_f1: f64,
    pub test_macro_f1: f64,
    pub per_class_test_f1: Vec<f64>,
    pub train_size: usize,
    pub test_size: usize,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TunedEvaluation {
    pub search: SearchOutcome,
    pub result: EvalResult,
}

/// Fits a model on the given rows of an assembled input matrix.
pub fn fit_model(
    inputs: &Array2<f64>,
    labels: &[usize],
    num_classes: usize,
    params: &GlsParams,
    strategy: LoadingStrategy,
    input_dim: usize,
    exec: Execution,
) -> Result<ChaosNetModel> {
    let normalizer = Normalizer::fit(inputs.view())?;
    let scaled = normalizer.transform(inputs.view())?;
    let chaos = transform_matrix_with(scaled.view(), params, exec)?;
    let prototypes = ClassPrototypes::fit(chaos.view(), labels, num_classes)?;
    Ok(ChaosNetModel::new(
        *params, strategy, input_dim, normalizer, prototypes,
    ))
}

fn run_split(
    graph: &GraphDataset,
    inputs: &Array2<f64>,
    strategy: LoadingStrategy,
    params: &GlsParams,
    plan: &SplitPlan,
    exec: Execution,
) -> Result<EvalResult> {
    let labels = graph.labels();
    let c = graph.num_classes();
    let pick = |idx: &[usize]| -> Vec<usize> { idx.iter().map(|&i| labels[i]).collect() };
    let train_x = inputs.select(Axis(0), &plan.train);
    let test_x = inputs.select(Axis(0), &plan.test);
    let train_y = pick(&plan.train);
    let test_y = pick(&plan.test);

    let normalizer = Normalizer::fit(train_x.view())?;
    let train_chaos =
        transform_matrix_with(normalizer.transform(train_x.view())?.view(), params, exec)?;
    let test_chaos =
        transform_matrix_with(normalizer.transform(test_x.view())?.view(), params, exec)?;
    let prototypes = ClassPrototypes::fit(train_chaos.view(), &train_y, c)?;

    let train_pred = prototypes.predict_with(train_chaos.view(), exec)?;
    let test_pred = prototypes.predict_with(test_chaos.view(), exec)?;
    let train_report = f1_report(&train_y, &train_pred.labels, c)?;
    let test_report = f1_report(&test_y, &test_pred.labels, c)?;

    Ok(EvalResult {
        strategy,
        params: *params,
        train_macro_f1: train_report.macro_f1,
        test_macro_f1: test_report.macro_f1,
        per_class_test_f1: test_report.per_class,
        train_size: plan.train.len(),
        test_size: plan.test.len(),
        ratio: plan.ratio,
        seed: plan.seed,
    })
}

/// Stratified split, normalizer and prototypes fit on the training part,
/// macro-F1 reported on both parts.
pub fn evaluate_pipeline(
    graph: &GraphDataset,
    strategy: LoadingStrategy,
    params: &GlsParams,
    ratio: f64,
    seed: u64,
) -> Result<EvalResult> {
    evaluate_pipeline_with(graph, strategy, params, ratio, seed, Execution::default())
}

pub fn evaluate_pipeline_with(
    graph: &GraphDataset,
    strategy: LoadingStrategy,
    params: &GlsParams,
    ratio: f64,
    seed: u64,
    exec: Execution,
) -> Result<EvalResult> {
    params.validate()?;
    let plan = stratified_split(graph.labels(), ratio, seed)?;
    let inputs = assemble_inputs(graph, strategy);
    run_split(graph, &inputs, strategy, params, &plan, exec)
}

/// Splits, searches `(q, b, epsilon)` by k-fold CV on the training part
/// only, then refits on the whole training part and scores the test part.
pub fn tune_and_evaluate(
    graph: &GraphDataset,
    strategy: LoadingStrategy,
    search: &SearchPlan,
    k: usize,
    ratio: f64,
    seed: u64,
) -> Result<TunedEvaluation> {
    let plan = stratified_split(graph.labels(), ratio, seed)?;
    let training = TrainingSet::from_split(graph, strategy, &plan);
    let outcome = CrossValidator::new(&training, k, seed)?.search(search, Execution::default())?;
    let inputs = assemble_inputs(graph, strategy);
    let result = run_split(
        graph,
        &inputs,
        strategy,
        &outcome.best,
        &plan,
        Execution::default(),
    )?;
    Ok(TunedEvaluation {
        search: outcome,
        result,
    })
}
