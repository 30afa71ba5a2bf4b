//! Deterministic learners for the induced feature spaces: regularized
//! linear models trained by L-BFGS, kernel ridge one-vs-rest, k-nearest
//! neighbours over a raw dissimilarity, and stratified cross-validation.

mod cv;
mod knn;
mod linear;
mod ridge;

pub use cv::{cross_validate, stratified_folds, CvOutcome, ParamEval};
pub use knn::{vote_from_distances, KnnModel};
pub use linear::{
    objective_and_grad, predict_linear, train_linear, LinearModel, Loss, TrainingLog,
};
pub use ridge::{predict_kernel, train_kernel, KernelModel};

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax_lowest(scores: ndarray::ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Classes present in a label slice must number at least two.
pub(crate) fn class_count(labels: &[usize]) -> crate::error::Result<usize> {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_classes];
    for &l in labels {
        seen[l] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(crate::error::Error::InvalidArgument(
            "training labels contain fewer than two classes".into(),
        ));
    }
    Ok(n_classes)
}
