use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A stratified train/test partition of `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    /// Sorted ascending.
    pub train: Vec<usize>,
    /// Sorted ascending.
    pub test: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

fn class_members(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    by_class
}

/// Per-class sampling without replacement. Each class with `n` members puts
/// `round(n * ratio)` of them in train, clamped so both sides get at least
/// one.
pub fn stratified_split(labels: &[usize], ratio: f64, seed: u64) -> Result<SplitPlan> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!(
            "train ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in class_members(labels) {
        let n = members.len();
        if n < 2 {
            return Err(Error::Stratification {
                class,
                count: n,
                required: 2,
            });
        }
        members.shuffle(&mut rng);
        let n_train = ((n as f64 * ratio).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train,
        test,
        seed,
        ratio,
    })
}

/// Stratified k-fold partition of `0..labels.len()`.
///
/// Members of each class are shuffled and dealt round-robin, continuing
/// from where the previous class stopped, so fold sizes differ by at most
/// one and every class is spread as evenly as it can be. Each returned fold
/// is sorted ascending.
pub fn kfold_indices(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of samples ({})",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (class, mut members) in class_members(labels) {
        if members.len() < k {
            log::warn!(
                "class {class} has {} sample(s), fewer than k = {k}; some folds will lack it",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(per_class: &[usize]) -> Vec<usize> {
        per_class
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect()
    }

    #[test]
    fn exact_divisibility() {
        let y = labels(&[10, 10, 10]);
        let plan = stratified_split(&y, 0.8, 7).unwrap();
        for c in 0..3 {
            assert_eq!(plan.train.iter().filter(|&&i| y[i] == c).count(), 8);
            assert_eq!(plan.test.iter().filter(|&&i| y[i] == c).count(), 2);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let y = labels(&[9, 13, 5]);
        assert_eq!(
            stratified_split(&y, 0.8, 42).unwrap(),
            stratified_split(&y, 0.8, 42).unwrap()
        );
        assert_ne!(
            stratified_split(&y, 0.8, 42).unwrap().train,
            stratified_split(&y, 0.8, 43).unwrap().train
        );
    }

    #[test]
    fn rounding_within_one() {
        let y = labels(&[7, 4]);
        let plan = stratified_split(&y, 0.8, 1).unwrap();
        let n0 = plan.train.iter().filter(|&&i| y[i] == 0).count();
        assert!(n0 == 5 || n0 == 6);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            stratified_split(&labels(&[5, 1]), 0.8, 0),
            Err(Error::Stratification {
                class: 1,
                count: 1,
                ..
            })
        ));
        assert!(stratified_split(&labels(&[5, 5]), 1.0, 0).is_err());
        assert!(stratified_split(&labels(&[5, 5]), 0.0, 0).is_err());
    }

    #[test]
    fn kfold_sizes() {
        let folds = kfold_indices(&[0; 10], 5, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());

        let folds = kfold_indices(&[0; 11], 5, 3).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![3, 2, 2, 2, 2]);
    }

    #[test]
    fn kfold_balanced_two_classes() {
        let y = labels(&[10, 10]);
        let folds = kfold_indices(&y, 2, 9).unwrap();
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| y[i] == 0).count(), 5);
            assert_eq!(f.iter().filter(|&&i| y[i] == 1).count(), 5);
        }
    }

    #[test]
    fn kfold_errors() {
        assert!(kfold_indices(&[0, 1, 0], 4, 0).is_err());
        assert!(kfold_indices(&[0, 1, 0], 1, 0).is_err());
    }
}
