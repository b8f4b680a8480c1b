use ndarray::{Array2, Axis};

use super::metrics::macro_f1;
use super::split::{kfold_indices, SplitPlan};
use crate::chaos::{transform_matrix_with, GlsParams, DEFAULT_MAX_ITERS};
use crate::classifier::{ClassPrototypes, Normalizer};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::{assemble_inputs, GraphDataset, LoadingStrategy};

/// Grid values are rounded to this many decimals so lattice points print
/// and compare cleanly.
const GRID_DECIMALS: i32 = 9;

fn snap(v: f64) -> f64 {
    let scale = 10f64.powi(GRID_DECIMALS);
    (v * scale).round() / scale
}

/// Evenly spaced values `lo, lo + step, ...` up to and including `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid bounds and step must be finite"));
        }
        if lo > hi {
            return Err(Error::invalid(format!("empty grid range: {lo} > {hi}")));
        }
        if step <= 0.0 {
            return Err(Error::invalid(format!(
                "grid step must be positive, got {step}"
            )));
        }
        Ok(GridAxis { lo, hi, step })
    }

    pub fn single(value: f64) -> Self {
        GridAxis {
            lo: value,
            hi: value,
            step: 1.0,
        }
    }

    /// Lattice through `center` with spacing `step`, reaching at most
    /// `radius` either side and staying within `[step, 1 - step]`.
    pub fn around(center: f64, radius: f64, step: f64) -> Result<Self> {
        let reach = (radius / step + 1e-9).floor();
        let below = reach.min(((center - step) / step + 1e-9).floor()).max(0.0);
        let above = reach
            .min(((1.0 - step - center) / step + 1e-9).floor())
            .max(0.0);
        GridAxis::new(
            snap(center - below * step),
            snap(center + above * step),
            step,
        )
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| snap(self.lo + i as f64 * self.step))
            .collect()
    }
}

/// Cartesian grid over `(q, b, epsilon)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamGrid {
    pub q: GridAxis,
    pub b: GridAxis,
    pub epsilon: GridAxis,
    pub max_iters: usize,
}

impl ParamGrid {
    pub fn new(q: GridAxis, b: GridAxis, epsilon: GridAxis) -> Self {
        ParamGrid {
            q,
            b,
            epsilon,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    /// Single point.
    pub fn point(params: &GlsParams) -> Self {
        ParamGrid {
            q: GridAxis::single(params.q),
            b: GridAxis::single(params.b),
            epsilon: GridAxis::single(params.epsilon),
            max_iters: params.max_iters,
        }
    }

    pub fn len(&self) -> usize {
        self.q.len() * self.b.len() * self.epsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points in lexicographic `(q, b, epsilon)` order.
    pub fn points(&self) -> Result<Vec<GlsParams>> {
        let (qs, bs, es) = (self.q.values(), self.b.values(), self.epsilon.values());
        let mut out = Vec::with_capacity(self.len());
        for &q in &qs {
            for &b in &bs {
                for &e in &es {
                    out.push(GlsParams::with_max_iters(q, b, e, self.max_iters)?);
                }
            }
        }
        Ok(out)
    }
}

/// Coarse grid, then a finer box around its optimum, then an
/// epsilon-only refinement with `q` and `b` held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StagedSearch {
    pub coarse: ParamGrid,
    pub fine_radius: f64,
    pub fine_step: f64,
    pub epsilon_radius: f64,
    pub epsilon_step: f64,
}

impl Default for StagedSearch {
    fn default() -> Self {
        let axis = GridAxis {
            lo: 0.01,
            hi: 0.5,
            step: 0.05,
        };
        StagedSearch {
            coarse: ParamGrid::new(axis, axis, axis),
            fine_radius: 0.05,
            fine_step: 0.01,
            epsilon_radius: 0.01,
            epsilon_step: 0.0005,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchPlan {
    Grid(ParamGrid),
    Staged(StagedSearch),
}

/// Cross-validated score of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub params: GlsParams,
    pub mean_cv_macro_f1: f64,
    pub per_fold_scores: Vec<f64>,
}

/// All records of one grid plus the winner.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub best: GlsParams,
    pub best_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub stages: Vec<SweepOutcome>,
    pub best: GlsParams,
    pub best_score: f64,
}

impl SearchOutcome {
    pub fn records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.stages.iter().flat_map(|s| s.records.iter())
    }
}

/// Raw assembled inputs and labels of the training partition only.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    inputs: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl TrainingSet {
    pub fn new(inputs: Array2<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if inputs.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} input rows but {} labels",
                inputs.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= num_classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(TrainingSet {
            inputs,
            labels,
            num_classes,
        })
    }

    /// Assembles the graph's inputs and keeps the rows in `plan.train`.
    pub fn from_split(graph: &GraphDataset, strategy: LoadingStrategy, plan: &SplitPlan) -> Self {
        let inputs = assemble_inputs(graph, strategy).select(Axis(0), &plan.train);
        let labels = plan.train.iter().map(|&i| graph.labels()[i]).collect();
        TrainingSet {
            inputs,
            labels,
            num_classes: graph.num_classes(),
        }
    }

    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

struct PreparedFold {
    train_x: Array2<f64>,
    train_y: Vec<usize>,
    val_x: Array2<f64>,
    val_y: Vec<usize>,
}

/// Stratified k-fold scorer. Folds are drawn once and normalized on their
/// own training part, so every grid point sees identical partitions.
pub struct CrossValidator {
    folds: Vec<PreparedFold>,
    num_classes: usize,
}

impl CrossValidator {
    pub fn new(train: &TrainingSet, k: usize, seed: u64) -> Result<Self> {
        let parts = kfold_indices(&train.labels, k, seed)?;
        let mut folds = Vec::with_capacity(k);
        for (held_out, val_idx) in parts.iter().enumerate() {
            let train_idx: Vec<usize> = parts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != held_out)
                .flat_map(|(_, p)| p.iter().copied())
                .collect();
            let raw_train = train.inputs.select(Axis(0), &train_idx);
            let normalizer = Normalizer::fit(raw_train.view())?;
            folds.push(PreparedFold {
                train_x: normalizer.transform(raw_train.view())?,
                train_y: train_idx.iter().map(|&i| train.labels[i]).collect(),
                val_x: normalizer.transform(train.inputs.select(Axis(0), val_idx).view())?,
                val_y: val_idx.iter().map(|&i| train.labels[i]).collect(),
            });
        }
        Ok(CrossValidator {
            folds,
            num_classes: train.num_classes,
        })
    }

    pub fn num_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn score(&self, params: &GlsParams) -> Result<SweepRecord> {
        self.score_with(params, Execution::default())
    }

    pub fn score_with(&self, params: &GlsParams, exec: Execution) -> Result<SweepRecord> {
        let mut per_fold_scores = Vec::with_capacity(self.folds.len());
        for fold in &self.folds {
            let train_chaos = transform_matrix_with(fold.train_x.view(), params, exec)?;
            let protos =
                ClassPrototypes::fit_present(train_chaos.view(), &fold.train_y, self.num_classes)?;
            let val_chaos = transform_matrix_with(fold.val_x.view(), params, exec)?;
            let pred = protos.predict_with(val_chaos.view(), exec)?;
            per_fold_scores.push(macro_f1(&fold.val_y, &pred.labels, self.num_classes)?);
        }
        let mean_cv_macro_f1 = per_fold_scores.iter().sum::<f64>() / per_fold_scores.len() as f64;
        Ok(SweepRecord {
            params: *params,
            mean_cv_macro_f1,
            per_fold_scores,
        })
    }

    /// Scores every point. Records come back in `points` order whatever the
    /// schedule; the best is the highest mean, earliest point on ties.
    pub fn sweep(&self, points: &[GlsParams], exec: Execution) -> Result<SweepOutcome> {
        if points.is_empty() {
            return Err(Error::invalid("empty parameter grid"));
        }
        let records = if points.len() > 1 {
            exec::try_map_slice(exec, points, |p| self.score_with(p, Execution::Sequential))?
        } else {
            vec![self.score_with(&points[0], exec)?]
        };
        let mut best = 0;
        for (i, r) in records.iter().enumerate() {
            if r.mean_cv_macro_f1 > records[best].mean_cv_macro_f1 {
                best = i;
            }
        }
        Ok(SweepOutcome {
            best: records[best].params,
            best_score: records[best].mean_cv_macro_f1,
            records,
        })
    }

    pub fn search(&self, plan: &SearchPlan, exec: Execution) -> Result<SearchOutcome> {
        let stages = match plan {
            SearchPlan::Grid(grid) => vec![self.sweep(&grid.points()?, exec)?],
            SearchPlan::Staged(staged) => {
                let coarse = self.sweep(&staged.coarse.points()?, exec)?;
                let c = coarse.best;
                let fine_grid = ParamGrid {
                    q: GridAxis::around(c.q, staged.fine_radius, staged.fine_step)?,
                    b: GridAxis::around(c.b, staged.fine_radius, staged.fine_step)?,
                    epsilon: GridAxis::around(c.epsilon, staged.fine_radius, staged.fine_step)?,
                    max_iters: staged.coarse.max_iters,
                };
                let fine = self.sweep(&fine_grid.points()?, exec)?;
                let f = fine.best;
                let eps_grid = ParamGrid {
                    q: GridAxis::single(f.q),
                    b: GridAxis::single(f.b),
                    epsilon: GridAxis::around(
                        f.epsilon,
                        staged.epsilon_radius,
                        staged.epsilon_step,
                    )?,
                    max_iters: staged.coarse.max_iters,
                };
                let refine = self.sweep(&eps_grid.points()?, exec)?;
                vec![coarse, fine, refine]
            }
        };
        let last = stages.last().expect("at least one stage");
        Ok(SearchOutcome {
            best: last.best,
            best_score: last.best_score,
            stages,
        })
    }
}

/// Exhaustive k-fold search over one grid of the training partition.
pub fn grid_search(
    train: &TrainingSet,
    grid: &ParamGrid,
    k: usize,
    seed: u64,
) -> Result<SweepOutcome> {
    CrossValidator::new(train, k, seed)?.sweep(&grid.points()?, Execution::default())
}
