use crate::error::{Error, Result};

/// Per-class F1 scores and their unweighted mean.
#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    pub per_class: Vec<f64>,
    pub macro_f1: f64,
    /// Classes that appear in neither the truth nor the predictions; they
    /// score 0.
    pub absent_classes: Vec<usize>,
}

/// Unweighted mean of per-class F1 over all `num_classes` classes.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<f64> {
    f1_report(y_true, y_pred, num_classes).map(|r| r.macro_f1)
}

pub fn f1_report(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<F1Report> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "y_true has {} labels but y_pred has {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    if num_classes == 0 {
        return Err(Error::invalid("num_classes must be positive"));
    }
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= num_classes || p >= num_classes {
            return Err(Error::invalid(format!(
                "label pair ({t}, {p}) out of range for {num_classes} classes"
            )));
        }
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }

    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let mut absent_classes = Vec::new();
    let per_class: Vec<f64> = (0..num_classes)
        .map(|c| {
            if tp[c] + fp[c] + fn_[c] == 0 {
                absent_classes.push(c);
                return 0.0;
            }
            let precision = ratio(tp[c], tp[c] + fp[c]);
            let recall = ratio(tp[c], tp[c] + fn_[c]);
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    if !absent_classes.is_empty() {
        log::warn!("classes {absent_classes:?} absent from labels and predictions; scored 0");
    }
    let macro_f1 = per_class.iter().sum::<f64>() / num_classes as f64;
    Ok(F1Report {
        per_class,
        macro_f1,
        absent_classes,
    })
}
