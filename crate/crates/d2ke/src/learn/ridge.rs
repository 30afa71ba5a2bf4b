//! Kernel ridge classification: one regularized least-squares solve per
//! class against `{-1, +1}` targets, sharing a single LU factorization.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramConstruction, GramMatrix};
use crate::learn::{argmax_lowest, class_count};

/// Dual coefficients of a kernel ridge fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    alphas: Array2<f64>,
    lambda: f64,
    n_classes: usize,
    construction: GramConstruction,
}

impl KernelModel {
    /// `n_train x n_classes` coefficient matrix.
    pub fn alphas(&self) -> &Array2<f64> {
        &self.alphas
    }

    pub fn n_train(&self) -> usize {
        self.alphas.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn construction(&self) -> GramConstruction {
        self.construction
    }

    /// Decision scores `K_cross . alphas` for rows of cross-kernel values
    /// against the training set.
    pub fn scores(&self, k_cross: &Array2<f64>) -> Result<Array2<f64>> {
        if k_cross.ncols() != self.n_train() {
            return Err(Error::DimensionMismatch(format!(
                "cross-kernel has {} columns but the model was trained on {} samples",
                k_cross.ncols(),
                self.n_train()
            )));
        }
        Ok(k_cross.dot(&self.alphas))
    }

    pub fn predict(&self, k_cross: &Array2<f64>) -> Result<Vec<usize>> {
        let scores = self.scores(k_cross)?;
        Ok(scores.rows().into_iter().map(argmax_lowest).collect())
    }
}

/// Solve `(K + lambda I) alpha_c = y_c` for each class with `y_c` the
/// `{-1, +1}` one-vs-rest targets.
pub fn train_kernel(gram: &GramMatrix, labels: &[usize], lambda: f64) -> Result<KernelModel> {
    let n = gram.n();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "gram is {n}x{n} but there are {} labels",
            labels.len()
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let n_classes = class_count(labels)?;

    let mut system = nalgebra::DMatrix::from_fn(n, n, |i, j| gram.values()[(i, j)]);
    for i in 0..n {
        system[(i, i)] += lambda;
    }
    let mut rhs = nalgebra::DMatrix::from_element(n, n_classes, -1.0);
    for (i, &l) in labels.iter().enumerate() {
        rhs[(i, l)] = 1.0;
    }
    let lu = system.lu();
    let solution = lu.solve(&rhs).ok_or_else(|| {
        Error::Numerical(format!(
            "kernel system is singular at lambda = {lambda}; increase lambda"
        ))
    })?;
    if solution.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!(
            "kernel solve produced non-finite coefficients at lambda = {lambda}; increase lambda"
        )));
    }
    let alphas = Array2::from_shape_fn((n, n_classes), |(i, c)| solution[(i, c)]);
    Ok(KernelModel { alphas, lambda, n_classes, construction: gram.construction() })
}

/// Predict with a trained model; convenience wrapper over
/// [`KernelModel::predict`].
pub fn predict_kernel(model: &KernelModel, k_cross: &Array2<f64>) -> Result<Vec<usize>> {
    model.predict(k_cross)
}
