//! Random feature embeddings, the induced kernel, and its softmin view.
//!
//! Given landmarks `omega_1..omega_R`, a rate `gamma`, and a measure `d`, an
//! object `x` maps to
//!
//! ```text
//! phi_j(x) = (1/sqrt(R)) * exp(-gamma * d(x, omega_j))
//! ```
//!
//! Inner products of embeddings are Monte-Carlo estimates of a kernel that
//! is positive definite by construction. The same quantity can be read as a
//! soft minimum of landmark-relayed distances: `phi(x) . phi(y) =
//! exp(-gamma * softmin_j (d(x, omega_j) + d(omega_j, y)))`; the softmin form
//! makes the large-`gamma` behavior transparent.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distance::Measure;
use crate::error::{Error, Result};
use crate::objects::StructuredObject;
use crate::sampling::{sample_omegas, OmegaDistribution, OmegaSample};
use crate::seeding::{derive_seed, STREAM_SWEEP, STREAM_SWEEP_REF};

/// Reference-sample multiplier for convergence sweeps: the "exact" kernel is
/// estimated at `64 * max(R_list)` landmarks with a disjoint seed.
pub const SWEEP_REF_MULTIPLIER: usize = 64;

/// A frozen feature map: landmarks, rate, and measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    omegas: OmegaSample,
    gamma: f64,
    measure: Measure,
}

impl EmbeddingModel {
    /// Requires `gamma > 0` and landmarks of the measure's object kind.
    pub fn new(omegas: OmegaSample, gamma: f64, measure: Measure) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        if omegas.kind() != measure.object_kind() {
            return Err(Error::KindMismatch {
                expected: measure.object_kind(),
                got: omegas.kind(),
            });
        }
        Ok(EmbeddingModel { omegas, gamma, measure })
    }

    pub fn omegas(&self) -> &OmegaSample {
        &self.omegas
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Number of landmarks, the embedding dimension.
    pub fn r(&self) -> usize {
        self.omegas.len()
    }

    /// The feature vector of one object.
    pub fn embed(&self, x: &StructuredObject) -> Result<Array1<f64>> {
        let d = self.distances_to_omegas(x)?;
        Ok(features_from_distance_row(&d, self.gamma))
    }

    /// Feature matrix for a slice of objects, row `i` = `embed(objects[i])`.
    ///
    /// Rows are computed independently (in parallel) from pure distance
    /// evaluations, so the result is bitwise identical to sequential
    /// evaluation. An empty slice yields a `0 x R` matrix.
    pub fn embed_objects(&self, objects: &[StructuredObject]) -> Result<Array2<f64>> {
        let d = omega_distances(objects, &self.omegas, self.measure)?;
        Ok(features_from_distances(&d, self.gamma))
    }

    /// Feature matrix for a dataset.
    pub fn embed_dataset(&self, data: &Dataset) -> Result<Array2<f64>> {
        self.embed_objects(data.objects())
    }

    /// The induced kernel value `embed(x) . embed(y)`, in `(0, 1]`.
    pub fn rf_kernel(&self, x: &StructuredObject, y: &StructuredObject) -> Result<f64> {
        let fx = self.embed(x)?;
        let fy = self.embed(y)?;
        Ok(fx.dot(&fy))
    }

    /// Raw distances from `x` to every landmark.
    pub fn distances_to_omegas(&self, x: &StructuredObject) -> Result<Array1<f64>> {
        let mut d = Array1::zeros(self.r());
        for (j, omega) in self.omegas.objects().iter().enumerate() {
            d[j] = self.measure.evaluate(x, omega)?;
        }
        Ok(d)
    }
}

/// Raw `n x R` distance matrix from each object to each landmark.
///
/// Entry `(i, j)` is `d(objects[i], omegas[j])`. Rows run in parallel;
/// failures report the offending object index.
pub fn omega_distances(
    objects: &[StructuredObject],
    omegas: &OmegaSample,
    measure: Measure,
) -> Result<Array2<f64>> {
    crate::distance::pairwise_distances(objects, omegas.objects(), measure)
}

/// Convert a distance matrix to features: `exp(-gamma * d) / sqrt(R)`.
///
/// Splitting this from the distance computation lets callers sweep `gamma`
/// without re-evaluating any distances.
pub fn features_from_distances(distances: &Array2<f64>, gamma: f64) -> Array2<f64> {
    let scale = 1.0 / (distances.ncols() as f64).sqrt();
    distances.mapv(|d| (-gamma * d).exp() * scale)
}

fn features_from_distance_row(distances: &Array1<f64>, gamma: f64) -> Array1<f64> {
    let scale = 1.0 / (distances.len() as f64).sqrt();
    distances.mapv(|d| (-gamma * d).exp() * scale)
}

/// Empirical softmin of the landmark-relayed distances:
///
/// ```text
/// -(1/gamma) * log( (1/R) * sum_j exp(-gamma * (d(x, omega_j) + d(omega_j, y))) )
/// ```
///
/// Computed in log-sum-exp form after subtracting the minimum sum, so no
/// intermediate can overflow. The result always lies in
/// `[min_j s_j, min_j s_j + log(R)/gamma]` where `s_j` is the relayed sum:
/// a mean of exponentials is at most its largest term and at least `1/R`
/// times it, and the sign flips under `-(1/gamma) log`.
pub fn softmin_distance(
    omegas: &OmegaSample,
    gamma: f64,
    x: &StructuredObject,
    y: &StructuredObject,
    measure: Measure,
) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    let mut sums = Vec::with_capacity(omegas.len());
    for omega in omegas.objects() {
        let s = measure.evaluate(x, omega)? + measure.evaluate(omega, y)?;
        sums.push(s);
    }
    let min = sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_shifted: f64 = sums
        .iter()
        .map(|s| (-gamma * (s - min)).exp())
        .sum::<f64>()
        / sums.len() as f64;
    Ok(min - mean_shifted.ln() / gamma)
}

/// Monte-Carlo convergence data for the induced kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// The swept landmark counts, ascending.
    pub r_levels: Vec<usize>,
    /// `errors[level][trial]`: max over pairs of the absolute deviation from
    /// the reference kernel.
    pub errors: Vec<Vec<f64>>,
    /// Mean of `errors[level]` across trials.
    pub mean_errors: Vec<f64>,
    /// `mean_errors[i] / mean_errors[i+1]` for consecutive levels; NaN when
    /// both levels have zero error (degenerate deterministic kernels).
    pub ratios: Vec<f64>,
    /// Landmark count of the reference estimate.
    pub r_ref: usize,
    /// Number of independent trials.
    pub trials: usize,
    pub gamma: f64,
}

/// Estimate kernel approximation error across landmark counts.
///
/// For each trial, draws a fresh landmark sample of `max(R_list)` (prefixes
/// give the smaller levels) plus a disjoint-seed reference sample of
/// `64 * max(R_list)`, then records the max over `pairs` of
/// `|k_R(x, y) - k_ref(x, y)|` per level.
pub fn kernel_convergence_sweep(
    dist: &OmegaDistribution,
    gamma: f64,
    measure: Measure,
    pairs: &[(StructuredObject, StructuredObject)],
    r_list: &[usize],
    seed: u64,
    trials: usize,
) -> Result<ConvergenceReport> {
    if r_list.is_empty() || r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "landmark counts must be non-empty and strictly ascending".into(),
        ));
    }
    if trials < 3 {
        return Err(Error::InvalidArgument(format!(
            "convergence sweeps need at least 3 trials, got {trials}"
        )));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no object pairs supplied".into()));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    let r_max = *r_list.last().expect("non-empty");
    let r_ref = SWEEP_REF_MULTIPLIER * r_max;
    let objects: Vec<StructuredObject> = pairs
        .iter()
        .flat_map(|(x, y)| [x.clone(), y.clone()])
        .collect();

    let mut errors: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); r_list.len()];
    for trial in 0..trials {
        let trial_sample =
            sample_omegas(dist, r_max, derive_seed(seed, STREAM_SWEEP, trial as u64))?;
        let ref_sample =
            sample_omegas(dist, r_ref, derive_seed(seed, STREAM_SWEEP_REF, trial as u64))?;
        let d_trial = omega_distances(&objects, &trial_sample, measure)?;
        let d_ref = omega_distances(&objects, &ref_sample, measure)?;

        // k_ref per pair: full-sample mean of exp(-gamma * (d_x + d_y)).
        let k_ref: Vec<f64> = (0..pairs.len())
            .map(|p| {
                let dx = d_ref.row(2 * p);
                let dy = d_ref.row(2 * p + 1);
                dx.iter()
                    .zip(dy)
                    .map(|(a, b)| (-gamma * (a + b)).exp())
                    .sum::<f64>()
                    / r_ref as f64
            })
            .collect();

        // Prefix sums over the trial sample give every level in one pass.
        for (level, &r) in r_list.iter().enumerate() {
            let mut worst = 0.0f64;
            for (p, k_exact) in k_ref.iter().enumerate() {
                let dx = d_trial.row(2 * p);
                let dy = d_trial.row(2 * p + 1);
                let k_r = dx
                    .iter()
                    .zip(dy)
                    .take(r)
                    .map(|(a, b)| (-gamma * (a + b)).exp())
                    .sum::<f64>()
                    / r as f64;
                worst = worst.max((k_r - k_exact).abs());
            }
            errors[level].push(worst);
        }
    }
    let mean_errors: Vec<f64> =
        errors.iter().map(|e| e.iter().sum::<f64>() / trials as f64).collect();
    let ratios: Vec<f64> = mean_errors
        .windows(2)
        .map(|w| w[0] / w[1])
        .collect();
    Ok(ConvergenceReport {
        r_levels: r_list.to_vec(),
        errors,
        mean_errors,
        ratios,
        r_ref,
        trials,
        gamma,
    })
}
