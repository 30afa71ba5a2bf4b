//! Stratified cross-validation with an exhaustive, deterministic grid
//! search. Fold assignment shuffles within each class and deals
//! round-robin, so class proportions survive in every fold.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::seeding::{stream_rng, STREAM_FOLDS};
use rand::seq::SliceRandom;

/// Assign indices to `folds` validation folds, stratified by label.
///
/// Every class must have at least `folds` members so each fold sees every
/// class. Returned folds are sorted index lists forming a partition of
/// `0..labels.len()`.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset("no labels to fold".into()));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < folds {
            return Err(Error::InvalidArgument(format!(
                "class {c} has {} samples, fewer than {folds} folds",
                members.len()
            )));
        }
    }
    let mut assignment = vec![Vec::new(); folds];
    for (c, mut members) in by_class.into_iter().enumerate() {
        let mut rng = stream_rng(seed, STREAM_FOLDS, c as u64);
        members.shuffle(&mut rng);
        for (i, idx) in members.into_iter().enumerate() {
            assignment[i % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

/// One grid point's cross-validation outcome.
#[derive(Debug, Clone)]
pub struct ParamEval<P> {
    pub params: P,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

/// All grid evaluations plus the index of the selected point.
#[derive(Debug, Clone)]
pub struct CvOutcome<P> {
    pub evaluations: Vec<ParamEval<P>>,
    pub best_index: usize,
}

impl<P> CvOutcome<P> {
    pub fn best(&self) -> &ParamEval<P> {
        &self.evaluations[self.best_index]
    }
}

/// Evaluate every grid point on every fold and pick the best mean accuracy.
///
/// `eval(params, train_idx, val_idx)` returns the validation accuracy in
/// `[0, 1]`; both index slices are sorted and disjoint, and together they
/// cover `0..n`. Exact mean-accuracy ties resolve via `prefer`: a
/// candidate replaces the incumbent only when `prefer(candidate,
/// incumbent)` is `Greater`.
pub fn cross_validate<P, F, C>(
    grid: &[P],
    folds: &[Vec<usize>],
    n: usize,
    mut eval: F,
    prefer: C,
) -> Result<CvOutcome<P>>
where
    P: Clone,
    F: FnMut(&P, &[usize], &[usize]) -> Result<f64>,
    C: Fn(&P, &P) -> Ordering,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty parameter grid".into()));
    }
    if folds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {}",
            folds.len()
        )));
    }
    let mut seen = vec![false; n];
    for fold in folds {
        for &i in fold {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(
                    "folds do not partition the index range".into(),
                ));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidArgument(
            "folds do not partition the index range".into(),
        ));
    }

    // Train indices per fold: everything outside the fold, kept sorted.
    let splits: Vec<(Vec<usize>, &[usize])> = folds
        .iter()
        .map(|fold| {
            let mut in_fold = vec![false; n];
            for &i in fold {
                in_fold[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
            (train, fold.as_slice())
        })
        .collect();

    let mut evaluations = Vec::with_capacity(grid.len());
    for params in grid {
        let mut fold_accuracies = Vec::with_capacity(folds.len());
        for (train_idx, val_idx) in &splits {
            let acc = eval(params, train_idx, val_idx)?;
            if !(0.0..=1.0).contains(&acc) {
                return Err(Error::Numerical(format!(
                    "fold accuracy {acc} outside [0, 1]"
                )));
            }
            fold_accuracies.push(acc);
        }
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
        evaluations.push(ParamEval { params: params.clone(), fold_accuracies, mean_accuracy });
    }

    let mut best_index = 0;
    for i in 1..evaluations.len() {
        let challenger = &evaluations[i];
        let incumbent = &evaluations[best_index];
        if challenger.mean_accuracy > incumbent.mean_accuracy
            || (challenger.mean_accuracy == incumbent.mean_accuracy
                && prefer(&challenger.params, &incumbent.params) == Ordering::Greater)
        {
            best_index = i;
        }
    }
    Ok(CvOutcome { evaluations, best_index })
}
