//! Distance-based random feature embeddings for structured objects.
//!
//! The core idea: given a dissimilarity measure `d` over time series, symbol
//! strings, or vector sets, draw `R` random landmark objects `omega_1..omega_R`
//! from a chosen distribution and map each object `x` to the feature vector
//!
//! ```text
//! phi(x) = (1/sqrt(R)) * [exp(-gamma * d(x, omega_1)), ..., exp(-gamma * d(x, omega_R))]
//! ```
//!
//! Inner products of these features form a positive-definite kernel even when
//! `d` itself is indefinite, so ordinary linear models trained on `phi(x)`
//! inherit the geometry of `d` without any kernel correction step.
//!
//! The crate also ships the classical distance-based alternatives used for
//! comparison: k-nearest neighbours on raw distances, distance-substitution
//! kernels (Gaussian and negated-square), pseudo-Euclidean embeddings obtained
//! from the spectrum of the centered squared-distance matrix, and
//! representative-set similarity features.
//!
//! Modules:
//! - [`objects`]: the three structured object types and datasets of them.
//! - [`distance`]: DTW, Levenshtein, and modified Hausdorff, plus brute-force
//!   reference oracles for small inputs.
//! - [`sampling`]: landmark distributions and deterministic landmark draws.
//! - [`embedding`]: feature maps, the induced kernel, softmin distances, and
//!   Monte-Carlo convergence diagnostics.
//! - [`gram`]: Gram matrices, distance-substitution kernels, pseudo-Euclidean
//!   embeddings.
//! - [`learn`]: linear models on features, kernel ridge, k-NN, and
//!   cross-validation.
//! - [`experiment`]: config-driven benchmark runs, result tables, timing
//!   reports.

pub mod dataset;
pub mod distance;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod gram;
pub mod io;
pub mod learn;
pub mod objects;
pub mod sampling;
pub mod seeding;
pub mod synthetic;

pub use dataset::{Dataset, DatasetMeta, SplitTag};
pub use distance::{Measure, MetricAxioms};
pub use embedding::EmbeddingModel;
pub use error::{Error, Result};
pub use gram::{EigenTreatment, GramConstruction, GramMatrix, PseudoEuclideanEmbedding};
pub use learn::{KernelModel, KnnModel, LinearModel, Loss};
pub use objects::{ObjectKind, StructuredObject, SymbolString, TimeSeries, VectorSet};
pub use sampling::{OmegaDistribution, OmegaSample};

/// Crate version reported in result tables and CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
