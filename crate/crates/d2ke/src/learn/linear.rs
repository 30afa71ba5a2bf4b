//! Regularized linear classification trained by limited-memory BFGS with
//! Armijo backtracking. Multiclass problems are handled one-vs-rest; the
//! whole path is deterministic, so retraining on identical inputs gives
//! bitwise-identical weights.

use std::collections::VecDeque;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{argmax_lowest, class_count};

const LBFGS_MEMORY: usize = 10;
const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Convex per-sample losses on the margin `y * z`, `y` in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    Logistic,
    HingeSquared,
}

impl Loss {
    pub fn tag(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::HingeSquared => "hinge-squared",
        }
    }

    /// Loss value and derivative with respect to the score `z`.
    fn value_and_slope(self, z: f64, y: f64) -> (f64, f64) {
        let margin = y * z;
        match self {
            Loss::Logistic => {
                // ln(1 + exp(-m)) without overflow on either sign of m.
                let (value, sigma) = if margin >= 0.0 {
                    let e = (-margin).exp();
                    (e.ln_1p(), e / (1.0 + e))
                } else {
                    let e = margin.exp();
                    (-margin + e.ln_1p(), 1.0 / (1.0 + e))
                };
                (value, -y * sigma)
            }
            Loss::HingeSquared => {
                let gap = 1.0 - margin;
                if gap > 0.0 {
                    (gap * gap, -2.0 * y * gap)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

impl std::fmt::Display for Loss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Loss {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(Loss::Logistic),
            "hinge-squared" => Ok(Loss::HingeSquared),
            other => Err(Error::Config(format!(
                "unknown loss `{other}` (expected logistic or hinge-squared)"
            ))),
        }
    }
}

/// Record of one scorer's optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
    /// Objective after each accepted step, starting at the zero vector.
    /// Non-increasing by construction of the line search.
    pub objective_trace: Vec<f64>,
}

/// Linear classifier over an explicit feature space.
///
/// Binary problems store one weight vector and score class 1 by its sign;
/// with three or more classes there is one one-vs-rest vector per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Array2<f64>,
    n_classes: usize,
    loss: Loss,
    mu: f64,
    logs: Vec<TrainingLog>,
}

impl LinearModel {
    /// One row per scorer: a single row for binary, `n_classes` rows otherwise.
    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn logs(&self) -> &[TrainingLog] {
        &self.logs
    }

    pub fn feature_width(&self) -> usize {
        self.weights.ncols()
    }

    /// Per-class decision scores, shape `n x n_classes`. For binary models
    /// class 0 scores zero and class 1 scores `w . x`, so the argmax rule
    /// reduces to the sign of the single scorer.
    pub fn scores(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.feature_width() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, got {}",
                self.feature_width(),
                features.ncols()
            )));
        }
        let raw = features.dot(&self.weights.t());
        if self.n_classes == 2 {
            let n = features.nrows();
            let mut out = Array2::zeros((n, 2));
            for i in 0..n {
                out[(i, 1)] = raw[(i, 0)];
            }
            Ok(out)
        } else {
            Ok(raw)
        }
    }

    /// Predicted class indices; score ties go to the lowest class.
    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<usize>> {
        let scores = self.scores(features)?;
        Ok(scores.rows().into_iter().map(argmax_lowest).collect())
    }
}

/// Regularized empirical risk and its gradient for one scorer:
/// `f(w) = mean_i loss(w . x_i, y_i) + mu/2 ||w||^2` with `y_i` in `{-1, +1}`.
///
/// Exposed so gradient implementations can be checked against finite
/// differences.
pub fn objective_and_grad(
    features: &Array2<f64>,
    targets: &[f64],
    weights: ArrayView1<'_, f64>,
    mu: f64,
    loss: Loss,
) -> Result<(f64, Array1<f64>)> {
    let n = features.nrows();
    if n == 0 {
        return Err(Error::EmptyDataset("objective needs at least one sample".into()));
    }
    if targets.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} feature rows but {} targets",
            targets.len()
        )));
    }
    if weights.len() != features.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} weight entries for {} feature columns",
            weights.len(),
            features.ncols()
        )));
    }
    let z = features.dot(&weights);
    let mut total = 0.0;
    let mut slopes = Array1::zeros(n);
    for i in 0..n {
        let (value, slope) = loss.value_and_slope(z[i], targets[i]);
        total += value;
        slopes[i] = slope;
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = features.t().dot(&slopes);
    grad.mapv_inplace(|g| g * inv_n);
    grad.scaled_add(mu, &weights);
    let objective = total * inv_n + 0.5 * mu * weights.dot(&weights);
    if !objective.is_finite() {
        return Err(Error::Numerical("objective is not finite".into()));
    }
    Ok((objective, grad))
}

/// Fit a linear model on feature rows and class labels.
///
/// Optimization starts from zero weights and stops when the gradient norm
/// drops to `tol` or after `max_iter` accepted steps.
pub fn train_linear(
    features: &Array2<f64>,
    labels: &[usize],
    mu: f64,
    loss: Loss,
    tol: f64,
    max_iter: usize,
) -> Result<LinearModel> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::EmptyDataset(format!(
            "training needs at least two samples, got {n}"
        )));
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} feature rows but {} labels",
            labels.len()
        )));
    }
    if features.ncols() == 0 {
        return Err(Error::InvalidArgument("features have zero width".into()));
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("features contain non-finite values".into()));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let n_classes = class_count(labels)?;

    let scorers = if n_classes == 2 { 1 } else { n_classes };
    let mut weights = Array2::zeros((scorers, features.ncols()));
    let mut logs = Vec::with_capacity(scorers);
    for s in 0..scorers {
        let positive = if n_classes == 2 { 1 } else { s };
        let targets: Vec<f64> =
            labels.iter().map(|&l| if l == positive { 1.0 } else { -1.0 }).collect();
        let (w, log) = lbfgs(features, &targets, mu, loss, tol, max_iter)?;
        weights.row_mut(s).assign(&w);
        logs.push(log);
    }
    Ok(LinearModel { weights, n_classes, loss, mu, logs })
}

/// Predict with a trained model; convenience wrapper over
/// [`LinearModel::predict`].
pub fn predict_linear(model: &LinearModel, features: &Array2<f64>) -> Result<Vec<usize>> {
    model.predict(features)
}

fn lbfgs(
    features: &Array2<f64>,
    targets: &[f64],
    mu: f64,
    loss: Loss,
    tol: f64,
    max_iter: usize,
) -> Result<(Array1<f64>, TrainingLog)> {
    let width = features.ncols();
    let mut w: Array1<f64> = Array1::zeros(width);
    let (mut f, mut g) = objective_and_grad(features, targets, w.view(), mu, loss)?;
    let mut trace = vec![f];
    let mut history: VecDeque<(Array1<f64>, Array1<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut grad_norm = g.dot(&g).sqrt();

    for _ in 0..max_iter {
        if grad_norm <= tol {
            converged = true;
            break;
        }

        // Two-loop recursion for the quasi-Newton direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * s.dot(&q);
            q.scaled_add(-alpha, y);
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.back() {
            let scale = s.dot(y) / y.dot(y);
            q.mapv_inplace(|v| v * scale);
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * y.dot(&q);
            q.scaled_add(alpha - beta, s);
        }
        let mut direction = -q;
        let mut slope = g.dot(&direction);
        if !(slope < 0.0) {
            direction = -g.clone();
            slope = -grad_norm * grad_norm;
        }

        // Armijo backtracking from a unit step.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut w_new = w.clone();
            w_new.scaled_add(step, &direction);
            let (f_new, g_new) = objective_and_grad(features, targets, w_new.view(), mu, loss)?;
            if f_new <= f + ARMIJO_C1 * step * slope {
                accepted = Some((w_new, f_new, g_new, step));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, f_new, g_new, step)) = accepted else {
            break; // no further decrease representable
        };

        let mut s_vec = direction;
        s_vec.mapv_inplace(|v| v * step);
        let y_vec = &g_new - &g;
        let sy = s_vec.dot(&y_vec);
        if sy > 1e-18 {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s_vec, y_vec, 1.0 / sy));
        }

        w = w_new;
        f = f_new;
        g = g_new;
        grad_norm = g.dot(&g).sqrt();
        iterations += 1;
        trace.push(f);
    }
    if grad_norm <= tol {
        converged = true;
    }

    Ok((
        w,
        TrainingLog {
            iterations,
            converged,
            final_grad_norm: grad_norm,
            objective_trace: trace,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn separable_features() -> (Array2<f64>, Vec<usize>) {
        let features = array![
            [1.0, 0.1],
            [0.9, 0.2],
            [1.1, -0.1],
            [-1.0, 0.3],
            [-0.8, -0.2],
            [-1.2, 0.1]
        ];
        let labels = vec![1, 1, 1, 0, 0, 0];
        (features, labels)
    }

    #[test]
    fn separable_binary_problem_is_solved() {
        let (features, labels) = separable_features();
        for loss in [Loss::Logistic, Loss::HingeSquared] {
            let model = train_linear(&features, &labels, 1e-3, loss, 1e-8, 500).unwrap();
            assert_eq!(model.predict(&features).unwrap(), labels);
            assert_eq!(model.weights().nrows(), 1);
        }
    }

    #[test]
    fn objective_trace_never_increases() {
        let (features, labels) = separable_features();
        let model = train_linear(&features, &labels, 1e-2, Loss::Logistic, 1e-10, 300).unwrap();
        let trace = &model.logs()[0].objective_trace;
        assert!(trace.len() >= 2);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let features = array![[0.3, -0.7, 0.2], [0.5, 0.1, -0.4], [-0.6, 0.4, 0.9]];
        let targets = [1.0, -1.0, 1.0];
        let w = array![0.2, -0.3, 0.5];
        for loss in [Loss::Logistic, Loss::HingeSquared] {
            let (_, grad) = objective_and_grad(&features, &targets, w.view(), 0.1, loss).unwrap();
            let h = 1e-6;
            for k in 0..3 {
                let mut wp = w.clone();
                wp[k] += h;
                let mut wm = w.clone();
                wm[k] -= h;
                let (fp, _) = objective_and_grad(&features, &targets, wp.view(), 0.1, loss).unwrap();
                let (fm, _) = objective_and_grad(&features, &targets, wm.view(), 0.1, loss).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                assert_relative_eq!(grad[k], fd, max_relative = 1e-5, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn strong_regularization_shrinks_weights() {
        let (features, labels) = separable_features();
        let model = train_linear(&features, &labels, 1e6, Loss::Logistic, 1e-10, 500).unwrap();
        let norm = model.weights().iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm <= 1e-3, "norm {norm} too large under mu = 1e6");
    }

    #[test]
    fn multiclass_uses_one_vector_per_class() {
        let features = array![
            [1.0, 0.0],
            [0.9, 0.1],
            [0.0, 1.0],
            [0.1, 0.9],
            [-1.0, -1.0],
            [-0.9, -1.1]
        ];
        let labels = vec![0, 0, 1, 1, 2, 2];
        let model = train_linear(&features, &labels, 1e-3, Loss::Logistic, 1e-8, 500).unwrap();
        assert_eq!(model.weights().nrows(), 3);
        assert_eq!(model.predict(&features).unwrap(), labels);
    }

    #[test]
    fn scaling_features_scales_binary_scores() {
        let (features, labels) = separable_features();
        let model = train_linear(&features, &labels, 1e-2, Loss::Logistic, 1e-8, 200).unwrap();
        let s1 = model.scores(&features).unwrap();
        let doubled = features.mapv(|x| 2.0 * x);
        let s2 = model.scores(&doubled).unwrap();
        for i in 0..features.nrows() {
            assert_relative_eq!(s2[(i, 1)], 2.0 * s1[(i, 1)], max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_score_predicts_class_zero() {
        let model = LinearModel {
            weights: array![[1.0, -1.0]],
            n_classes: 2,
            loss: Loss::Logistic,
            mu: 1.0,
            logs: vec![],
        };
        let tied = array![[0.5, 0.5]];
        assert_eq!(model.predict(&tied).unwrap(), vec![0]);
        let positive = array![[1.0, 0.0]];
        assert_eq!(model.predict(&positive).unwrap(), vec![1]);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let (features, labels) = separable_features();
        assert!(train_linear(&features, &labels, 0.0, Loss::Logistic, 1e-8, 100).is_err());
        assert!(train_linear(&features, &labels, 1e-2, Loss::Logistic, 0.0, 100).is_err());
        assert!(train_linear(&features, &labels, 1e-2, Loss::Logistic, 1e-8, 0).is_err());
        assert!(train_linear(&features, &[0; 6], 1e-2, Loss::Logistic, 1e-8, 100).is_err());
        assert!(train_linear(&features, &labels[..4], 1e-2, Loss::Logistic, 1e-8, 100).is_err());
        let bad = array![[f64::NAN, 0.0], [0.0, 1.0]];
        assert!(train_linear(&bad, &[0, 1], 1e-2, Loss::Logistic, 1e-8, 100).is_err());
    }

    #[test]
    fn retraining_is_bitwise_reproducible() {
        let (features, labels) = separable_features();
        let a = train_linear(&features, &labels, 1e-3, Loss::HingeSquared, 1e-9, 400).unwrap();
        let b = train_linear(&features, &labels, 1e-3, Loss::HingeSquared, 1e-9, 400).unwrap();
        assert_eq!(a.weights(), b.weights());
    }
}
