//! Splitting, scoring and hyperparameter search.

mod metrics;
mod pipeline;
mod search;
mod split;

pub use metrics::{f1_report, macro_f1, F1Report};
pub use pipeline::{
    evaluate_pipeline, evaluate_pipeline_with, fit_model, tune_and_evaluate, EvalResult,
    TunedEvaluation,
};
pub use search::{
    grid_search, CrossValidator, GridAxis, ParamGrid, SearchOutcome, SearchPlan, StagedSearch,
    SweepOutcome, SweepRecord, TrainingSet,
};
pub use split::{kfold_indices, stratified_split, SplitPlan};
