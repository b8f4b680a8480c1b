//! GLS chaotic neurons and the chaos feature transform.
//!
//! A neuron starts at activity `q` and iterates the GLS map
//!
//! ```text
//! T(x) = x / b              if 0 <= x < b
//!      = (1 - x) / (1 - b)  if b <= x < 1
//! ```
//!
//! until its activity lands within `epsilon` of the stimulus. The orbit from
//! `q` does not depend on the stimulus; the stimulus only decides where the
//! trace stops.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Map outputs are clamped to `1 - CLAMP_MARGIN`. Only `x == b` reaches 1.0.
pub const CLAMP_MARGIN: f64 = 1e-12;

/// Iteration cap used throughout the experiments.
pub const DEFAULT_MAX_ITERS: usize = 5000;

/// Output columns emitted per input column.
pub const FEATURES_PER_INPUT: usize = 4;

/// Configuration of a GLS neuron.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlsParams {
    /// Initial neural activity.
    pub q: f64,
    /// Discrimination threshold, also the map's breakpoint.
    pub b: f64,
    /// Stimulus recognition radius.
    pub epsilon: f64,
    pub max_iters: usize,
}

impl GlsParams {
    pub fn new(q: f64, b: f64, epsilon: f64) -> Result<Self> {
        Self::with_max_iters(q, b, epsilon, DEFAULT_MAX_ITERS)
    }

    pub fn with_max_iters(q: f64, b: f64, epsilon: f64, max_iters: usize) -> Result<Self> {
        let params = GlsParams {
            q,
            b,
            epsilon,
            max_iters,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "{name} must lie in (0, 1), got {v}"
                )))
            }
        };
        open_unit("q", self.q)?;
        open_unit("b", self.b)?;
        open_unit("epsilon", self.epsilon)?;
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// One application of the GLS map with threshold `b`.
pub fn gls_step(x: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::invalid(format!(
            "activity must lie in [0, 1), got {x}"
        )));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::invalid(format!(
            "threshold must lie in (0, 1), got {b}"
        )));
    }
    Ok(step(x, b))
}

#[inline(always)]
fn step(x: f64, b: f64) -> f64 {
    let y = if x < b { x / b } else { (1.0 - x) / (1.0 - b) };
    y.min(1.0 - CLAMP_MARGIN)
}

/// The activity sequence produced by a neuron for one stimulus.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuralTrace {
    values: Vec<f64>,
    fired: bool,
}

impl NeuralTrace {
    /// Builds a trace from raw samples, e.g. for replaying a recorded trace.
    pub fn from_values(values: Vec<f64>, fired: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a neural trace needs at least one sample"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..1.0).contains(*v))
        {
            return Err(Error::invalid(format!(
                "trace sample {i} = {v} is outside [0, 1)"
            )));
        }
        Ok(NeuralTrace { values, fired })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fired(&self) -> bool {
        self.fired
    }

    /// Number of map applications before the trace stopped.
    pub fn firing_time(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_stimulus(stimulus: f64) -> Result<()> {
    if (0.0..=1.0).contains(&stimulus) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "stimulus must lie in [0, 1], got {stimulus}"
        )))
    }
}

/// Iterates the neuron from `q` until it recognizes `stimulus`
/// (`|x - stimulus| < epsilon`) or `max_iters` map applications have run.
pub fn generate_trace(stimulus: f64, params: &GlsParams) -> Result<NeuralTrace> {
    params.validate()?;
    check_stimulus(stimulus)?;

    let mut values = Vec::new();
    let mut x = params.q;
    values.push(x);
    let mut fired = (x - stimulus).abs() < params.epsilon;
    while !fired && values.len() <= params.max_iters {
        x = step(x, params.b);
        values.push(x);
        fired = (x - stimulus).abs() < params.epsilon;
    }
    Ok(NeuralTrace { values, fired })
}

/// The four summary features of a neural trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaosFeatures {
    pub firing_time: usize,
    /// Fraction of samples at or above the threshold.
    pub firing_rate: f64,
    /// Sum of squared samples.
    pub energy: f64,
    /// Shannon entropy (bits) of the threshold symbol sequence.
    pub entropy: f64,
}

impl ChaosFeatures {
    /// Column order used by [`transform_matrix`].
    pub fn to_array(&self) -> [f64; FEATURES_PER_INPUT] {
        [
            self.firing_time as f64,
            self.firing_rate,
            self.energy,
            self.entropy,
        ]
    }

    fn from_counts(len: usize, above: usize, energy: f64) -> Self {
        let n = len as f64;
        ChaosFeatures {
            firing_time: len - 1,
            firing_rate: above as f64 / n,
            energy,
            entropy: binary_entropy(above, len),
        }
    }
}

fn binary_entropy(ones: usize, len: usize) -> f64 {
    let n = len as f64;
    [len - ones, ones]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Features of a trace, thresholded at `b`. Every sample, including the
/// initial activity, takes part.
pub fn trace_features(trace: &NeuralTrace, b: f64) -> ChaosFeatures {
    let mut above = 0;
    let mut energy = 0.0;
    for &x in &trace.values {
        if x >= b {
            above += 1;
        }
        energy += x * x;
    }
    ChaosFeatures::from_counts(trace.values.len(), above, energy)
}

/// Streaming equivalent of `trace_features(&generate_trace(..), b)` that
/// never materializes the trace. Inputs must already be validated.
fn stimulus_features(stimulus: f64, params: &GlsParams) -> ChaosFeatures {
    let b = params.b;
    let mut x = params.q;
    let mut len = 1;
    let mut above = usize::from(x >= b);
    let mut energy = x * x;
    while (x - stimulus).abs() >= params.epsilon && len <= params.max_iters {
        x = step(x, b);
        len += 1;
        above += usize::from(x >= b);
        energy += x * x;
    }
    ChaosFeatures::from_counts(len, above, energy)
}

/// Maps an `n x d` matrix of normalized stimuli to `n x 4d` chaos features.
///
/// Input column `j` becomes output columns `4j..4j+4` holding
/// `[firing_time, firing_rate, energy, entropy]`.
pub fn transform_matrix(samples: ArrayView2<'_, f64>, params: &GlsParams) -> Result<Array2<f64>> {
    transform_matrix_with(samples, params, Execution::default())
}

pub fn transform_matrix_with(
    samples: ArrayView2<'_, f64>,
    params: &GlsParams,
    exec: Execution,
) -> Result<Array2<f64>> {
    params.validate()?;
    let (rows, cols) = samples.dim();
    for ((r, c), &v) in samples.indexed_iter() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!(
                "sample at row {r}, column {c} is {v}; expected a value in [0, 1]"
            )));
        }
    }

    // Every distinct stimulus value is traced once; sparse and binary inputs
    // repeat the same few values across the whole matrix.
    let mut distinct: Vec<u64> = samples.iter().map(|v| v.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let table: Vec<[f64; FEATURES_PER_INPUT]> = exec::map_slice(exec, &distinct, |&bits| {
        stimulus_features(f64::from_bits(bits), params).to_array()
    });

    let width = cols * FEATURES_PER_INPUT;
    let mut out = vec![0.0; rows * width];
    exec::for_each_row_mut(exec, &mut out, width, |r, row| {
        for (c, block) in row.chunks_exact_mut(FEATURES_PER_INPUT).enumerate() {
            let bits = samples[(r, c)].to_bits();
            let idx = distinct
                .binary_search(&bits)
                .expect("every sample is in the distinct table");
            block.copy_from_slice(&table[idx]);
        }
    });
    Ok(Array2::from_shape_vec((rows, width), out).expect("shape matches buffer"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn params(q: f64, b: f64, eps: f64) -> GlsParams {
        GlsParams::new(q, b, eps).unwrap()
    }

    #[test]
    fn gls_step_examples() {
        assert_eq!(gls_step(0.25, 0.5).unwrap(), 0.5);
        assert_eq!(gls_step(0.0, 0.47).unwrap(), 0.0);
        assert!((gls_step(0.9, 0.75).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn gls_step_clamps_breakpoint() {
        let y = gls_step(0.3, 0.3).unwrap();
        assert_eq!(y, 1.0 - CLAMP_MARGIN);
        assert!(y < 1.0);
    }

    #[test]
    fn gls_step_rejects_out_of_domain() {
        assert!(gls_step(1.0, 0.5).is_err());
        assert!(gls_step(-0.1, 0.5).is_err());
        assert!(gls_step(0.2, 0.0).is_err());
        assert!(gls_step(0.2, 1.0).is_err());
        assert!(gls_step(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(GlsParams::new(0.5, 0.5, 0.1).is_ok());
        assert!(GlsParams::new(0.0, 0.5, 0.1).is_err());
        assert!(GlsParams::new(0.5, 1.0, 0.1).is_err());
        assert!(GlsParams::new(0.5, 0.5, 1.5).is_err());
        assert!(GlsParams::with_max_iters(0.5, 0.5, 0.1, 0).is_err());
    }

    #[test]
    fn trace_fires_immediately_when_q_matches() {
        for b in [0.1, 0.5, 0.9] {
            let t = generate_trace(0.3, &params(0.3, b, 0.1)).unwrap();
            assert_eq!(t.values(), &[0.3]);
            assert!(t.fired());
            assert_eq!(t.firing_time(), 0);
        }
    }

    #[test]
    fn trace_hand_iteration() {
        let t = generate_trace(0.35, &params(0.1, 0.5, 0.06)).unwrap();
        assert_eq!(t.values(), &[0.1, 0.2, 0.4]);
        assert!(t.fired());
    }

    #[test]
    fn trace_truncates_at_max_iters() {
        // 0.1 -> 0.2 never gets within 0.05 of 0.9 in one step
        let p = GlsParams::with_max_iters(0.1, 0.5, 0.05, 1).unwrap();
        let t = generate_trace(0.9, &p).unwrap();
        assert!(!t.fired());
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn dyadic_threshold_orbit_collapses_in_floating_point() {
        // With b = 0.5 the map is exact bit-shifting on doubles, so the
        // period-2 orbit {0.4, 0.8} drifts onto the breakpoint, hits the
        // clamp at 1 - 1e-12 and recognizes 0.99 at step 53.
        let p = GlsParams::with_max_iters(0.4, 0.5, 0.01, 5000).unwrap();
        let t = generate_trace(0.99, &p).unwrap();
        assert!(t.fired());
        assert_eq!(t.firing_time(), 53);
        assert_eq!(*t.values().last().unwrap(), 1.0 - CLAMP_MARGIN);
    }

    #[test]
    fn trace_accepts_unit_stimulus() {
        let t = generate_trace(1.0, &params(0.3, 0.47, 0.05)).unwrap();
        if t.fired() {
            assert!(*t.values().last().unwrap() > 0.95);
        }
        assert!(generate_trace(1.01, &params(0.3, 0.47, 0.05)).is_err());
    }

    #[test]
    fn features_examples() {
        let t = NeuralTrace::from_values(vec![0.1, 0.2, 0.4], true).unwrap();
        let f = trace_features(&t, 0.5);
        assert_eq!(f.firing_time, 2);
        assert_eq!(f.firing_rate, 0.0);
        assert!((f.energy - 0.21).abs() < 1e-12);
        assert_eq!(f.entropy, 0.0);

        let t = NeuralTrace::from_values(vec![0.3], true).unwrap();
        let f = trace_features(&t, 0.5);
        assert_eq!(f.firing_time, 0);
        assert_eq!(f.firing_rate, 0.0);
        assert!((f.energy - 0.09).abs() < 1e-12);
        assert_eq!(f.entropy, 0.0);

        let t = NeuralTrace::from_values(vec![0.6, 0.2], true).unwrap();
        let f = trace_features(&t, 0.5);
        assert_eq!(f.firing_rate, 0.5);
        assert!((f.energy - 0.40).abs() < 1e-12);
        assert_eq!(f.entropy, 1.0);
    }

    #[test]
    fn from_values_rejects_bad_traces() {
        assert!(NeuralTrace::from_values(vec![], true).is_err());
        assert!(NeuralTrace::from_values(vec![0.2, 1.0], true).is_err());
    }

    #[test]
    fn streaming_features_match_materialized_trace() {
        let p = GlsParams::with_max_iters(0.37, 0.61, 0.003, 700).unwrap();
        for i in 0..=200 {
            let s = i as f64 / 200.0;
            let t = generate_trace(s, &p).unwrap();
            assert_eq!(stimulus_features(s, &p), trace_features(&t, p.b));
        }
    }

    #[test]
    fn transform_shapes_and_layout() {
        let p = params(0.52, 0.75, 0.1);
        let x = array![[0.35, 0.9]];
        let out = transform_matrix(x.view(), &p).unwrap();
        assert_eq!(out.dim(), (1, 8));
        for (c, &s) in [0.35, 0.9].iter().enumerate() {
            let f = trace_features(&generate_trace(s, &p).unwrap(), p.b).to_array();
            assert_eq!(out.row(0).slice(ndarray::s![4 * c..4 * c + 4]).to_vec(), f);
        }

        let wide = Array2::from_elem((3, 1433), 0.25);
        assert_eq!(transform_matrix(wide.view(), &p).unwrap().dim(), (3, 5732));
    }

    #[test]
    fn transform_duplicate_rows_identical() {
        let p = params(0.3, 0.6, 0.02);
        let x = array![[0.1, 0.7, 0.33], [0.5, 0.5, 0.5], [0.1, 0.7, 0.33]];
        let out = transform_matrix(x.view(), &p).unwrap();
        assert_eq!(out.row(0), out.row(2));
    }

    #[test]
    fn transform_reports_offending_entry() {
        let p = params(0.3, 0.6, 0.02);
        let x = array![[0.1, 0.2], [0.3, 1.2]];
        let err = transform_matrix(x.view(), &p).unwrap_err().to_string();
        assert!(err.contains("row 1, column 1"), "{err}");
    }

    #[test]
    fn transform_schedules_agree() {
        let p = params(0.49, 0.71, 0.004);
        let x = Array2::from_shape_fn((37, 11), |(r, c)| ((r * 31 + c * 17) % 101) as f64 / 100.0);
        let seq = transform_matrix_with(x.view(), &p, Execution::Sequential).unwrap();
        let par = transform_matrix_with(x.view(), &p, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }
}
