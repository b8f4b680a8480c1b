//! Neurochaos learning for node classification on graphs.
//!
//! Every input feature drives a GLS chaotic neuron whose trace is summarized
//! by four features (firing time, firing rate, energy, entropy). Graph
//! structure enters through one-hop mean aggregation of neighbour features,
//! and classification uses per-class mean vectors compared by cosine
//! similarity.
//!
//! The crate is organised as:
//!
//! - [`chaos`]: the GLS map, neural traces and the feature transform.
//! - [`graph`]: CSV ingestion, homophily statistics, aggregation and input assembly.
//! - [`classifier`]: min-max normalization, class prototypes, model persistence.
//! - [`eval`]: stratified splits, k-fold CV, macro-F1, grid and staged search.
//! - [`synthetic`]: deterministic fixture graphs.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default) is
//! enabled; [`Execution`] selects the schedule per call and results are
//! bit-identical under either.

pub mod chaos;
pub mod classifier;
mod error;
pub mod eval;
mod exec;
pub mod graph;
pub mod synthetic;

pub use chaos::{
    generate_trace, gls_step, trace_features, transform_matrix, transform_matrix_with,
    ChaosFeatures, GlsParams, NeuralTrace,
};
pub use classifier::{ChaosNetModel, ClassPrototypes, Normalizer, Predictions};
pub use error::{Error, Result};
pub use eval::{
    evaluate_pipeline, grid_search, kfold_indices, macro_f1, stratified_split, EvalResult,
    GridAxis, ParamGrid, SearchOutcome, SearchPlan, SplitPlan, StagedSearch, SweepRecord,
    TrainingSet,
};
pub use exec::Execution;
pub use graph::{
    assemble_inputs, homophily, load_graph, load_nodes, mean_aggregate, GraphDataset,
    HomophilyReport, LoadedGraph, LoadingStrategy,
};
