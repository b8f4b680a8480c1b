//! Min-max normalization and the cosine-prototype classifier.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::chaos::GlsParams;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::LoadingStrategy;

/// Per-column min/max learned from training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(train: ArrayView2<'_, f64>) -> Result<Self> {
        if train.nrows() == 0 {
            return Err(Error::invalid("cannot fit a normalizer on zero rows"));
        }
        let (min, max) = train
            .axis_iter(Axis(1))
            .map(|col| {
                col.iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .unzip();
        Ok(Normalizer { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn num_columns(&self) -> usize {
        self.min.len()
    }

    /// Affine map onto [0, 1] with clipping. Constant columns map to 0.
    pub fn transform(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.num_columns() {
            return Err(Error::DimensionMismatch {
                expected: self.num_columns(),
                actual: data.ncols(),
            });
        }
        let mut out = data.to_owned();
        for (mut col, (&lo, &hi)) in out
            .axis_iter_mut(Axis(1))
            .zip(self.min.iter().zip(&self.max))
        {
            let span = hi - lo;
            if span > 0.0 {
                col.mapv_inplace(|x| ((x - lo) / span).clamp(0.0, 1.0));
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }
}

/// Per-class mean feature vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassPrototypes {
    class_ids: Vec<usize>,
    prototypes: Array2<f64>,
}

/// Predicted labels plus the rows whose feature vector had zero norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    pub degenerate_rows: Vec<usize>,
}

impl ClassPrototypes {
    /// Requires every class in `0..num_classes` to have at least one row.
    pub fn fit(
        features: ArrayView2<'_, f64>,
        labels: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let (sums, counts) = class_sums(features, labels, num_classes)?;
        if let Some(c) = counts.iter().position(|&k| k == 0) {
            return Err(Error::MissingClass(c));
        }
        Ok(Self::from_sums(sums, &counts))
    }

    /// Like [`fit`](Self::fit) but keeps only classes that occur in
    /// `labels`. Used inside cross-validation where a small class can be
    /// absent from a fold's training part.
    pub fn fit_present(
        features: ArrayView2<'_, f64>,
        labels: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let (sums, counts) = class_sums(features, labels, num_classes)?;
        Ok(Self::from_sums(sums, &counts))
    }

    fn from_sums(sums: Array2<f64>, counts: &[usize]) -> Self {
        let class_ids: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
        let mut prototypes = sums.select(Axis(0), &class_ids);
        for (mut row, &c) in prototypes.outer_iter_mut().zip(&class_ids) {
            let n = counts[c] as f64;
            row.mapv_inplace(|s| s / n);
        }
        ClassPrototypes {
            class_ids,
            prototypes,
        }
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn prototypes(&self) -> &Array2<f64> {
        &self.prototypes
    }

    pub fn num_columns(&self) -> usize {
        self.prototypes.ncols()
    }

    /// Assigns each row to the prototype with the highest cosine similarity.
    /// Zero-norm vectors score 0 against everything; ties go to the lowest
    /// class index.
    pub fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Predictions> {
        self.predict_with(features, Execution::default())
    }

    pub fn predict_with(
        &self,
        features: ArrayView2<'_, f64>,
        exec: Execution,
    ) -> Result<Predictions> {
        if features.ncols() != self.num_columns() {
            return Err(Error::DimensionMismatch {
                expected: self.num_columns(),
                actual: features.ncols(),
            });
        }
        let proto_norms: Vec<f64> = self.prototypes.outer_iter().map(|p| norm(p)).collect();
        let rows: Vec<usize> = (0..features.nrows()).collect();
        let scored = exec::map_slice(exec, &rows, |&r| {
            let row = features.row(r);
            let row_norm = norm(row);
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (k, (proto, &pn)) in self.prototypes.outer_iter().zip(&proto_norms).enumerate() {
                let score = if row_norm > 0.0 && pn > 0.0 {
                    row.dot(&proto) / (row_norm * pn)
                } else {
                    0.0
                };
                if score > best_score {
                    best = k;
                    best_score = score;
                }
            }
            (self.class_ids[best], row_norm == 0.0)
        });
        let degenerate_rows: Vec<usize> = scored
            .iter()
            .enumerate()
            .filter(|(_, s)| s.1)
            .map(|(i, _)| i)
            .collect();
        if !degenerate_rows.is_empty() {
            log::warn!(
                "{} row(s) have zero norm and were assigned class {}",
                degenerate_rows.len(),
                self.class_ids[0]
            );
        }
        Ok(Predictions {
            labels: scored.into_iter().map(|s| s.0).collect(),
            degenerate_rows,
        })
    }
}

fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

fn class_sums(
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    num_classes: usize,
) -> Result<(Array2<f64>, Vec<usize>)> {
    if features.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    let mut sums = Array2::zeros((num_classes, features.ncols()));
    let mut counts = vec![0usize; num_classes];
    for (row, &c) in features.outer_iter().zip(labels) {
        if c >= num_classes {
            return Err(Error::invalid(format!(
                "label {c} out of range for {num_classes} classes"
            )));
        }
        sums.row_mut(c).zip_mut_with(&row, |s, &x| *s += x);
        counts[c] += 1;
    }
    Ok((sums, counts))
}

const MODEL_FORMAT: u32 = 1;

/// A trained classifier with everything needed to predict on new nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosNetModel {
    pub format: u32,
    pub params: GlsParams,
    pub strategy: LoadingStrategy,
    /// Raw feature count per node before assembly.
    pub input_dim: usize,
    pub normalizer: Normalizer,
    pub prototypes: ClassPrototypes,
}

impl ChaosNetModel {
    pub fn new(
        params: GlsParams,
        strategy: LoadingStrategy,
        input_dim: usize,
        normalizer: Normalizer,
        prototypes: ClassPrototypes,
    ) -> Self {
        ChaosNetModel {
            format: MODEL_FORMAT,
            params,
            strategy,
            input_dim,
            normalizer,
            prototypes,
        }
    }

    /// Normalizes, transforms and classifies an assembled input matrix.
    pub fn predict(&self, inputs: ArrayView2<'_, f64>) -> Result<Predictions> {
        let scaled = self.normalizer.transform(inputs)?;
        let chaos = crate::chaos::transform_matrix(scaled.view(), &self.params)?;
        self.prototypes.predict(chaos.view())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ChaosNetModel =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Model(format!(
                "unsupported format version {}",
                model.format
            )));
        }
        model.params.validate()?;
        let width = model.strategy.width(model.input_dim);
        if model.normalizer.num_columns() != width
            || model.normalizer.min.len() != model.normalizer.max.len()
        {
            return Err(Error::Model(
                "normalizer width disagrees with input_dim".into(),
            ));
        }
        if model.prototypes.num_columns() != width * crate::chaos::FEATURES_PER_INPUT
            || model.prototypes.class_ids.len() != model.prototypes.prototypes.nrows()
            || model.prototypes.class_ids.is_empty()
        {
            return Err(Error::Model("prototype matrix has the wrong shape".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
