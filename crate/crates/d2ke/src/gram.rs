//! Gram matrices, distance-substitution kernels, and pseudo-Euclidean
//! embeddings of distance matrices.
//!
//! The distance-substitution constructions plug a dissimilarity straight
//! into a kernel formula. For non-Euclidean dissimilarities the result is
//! generally indefinite, which is exactly what the random-feature route
//! avoids; the `psd_certified` flag records the difference.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a Gram matrix was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GramConstruction {
    /// Inner products of random feature embeddings; PSD by construction.
    D2keRf,
    /// `exp(-gamma * d^2)` distance substitution; indefinite in general.
    DskRbf,
    /// `-d^2` distance substitution; indefinite in general.
    DskNd,
    /// High-R Monte-Carlo reference estimate of the exact kernel.
    ExactMc,
}

impl GramConstruction {
    pub fn tag(self) -> &'static str {
        match self {
            GramConstruction::D2keRf => "d2ke-rf",
            GramConstruction::DskRbf => "dsk-rbf",
            GramConstruction::DskNd => "dsk-nd",
            GramConstruction::ExactMc => "exact-mc",
        }
    }
}

impl std::fmt::Display for GramConstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A symmetric kernel matrix tagged with its construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    values: Array2<f64>,
    construction: GramConstruction,
    psd_certified: bool,
}

impl GramMatrix {
    /// Wrap a kernel matrix, checking squareness, symmetry (within `1e-12`
    /// relative to the largest entry), and finiteness.
    pub fn new(
        values: Array2<f64>,
        construction: GramConstruction,
        psd_certified: bool,
    ) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m {
            return Err(Error::DimensionMismatch(format!(
                "gram matrix must be square, got {n}x{m}"
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("gram matrix has non-finite entries".into()));
        }
        let scale = values.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (values[(i, j)] - values[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Numerical(format!(
                        "gram matrix asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(GramMatrix { values, construction, psd_certified })
    }

    /// Gram of explicit feature rows: `X X^T`, PSD-certified.
    pub fn from_features(features: &Array2<f64>) -> GramMatrix {
        let values = features.dot(&features.t());
        // Products of the same rows in the same order are exactly symmetric
        // in floating point; mirror the upper triangle to make that literal.
        let n = values.nrows();
        let mut values = values;
        for i in 0..n {
            for j in (i + 1)..n {
                values[(j, i)] = values[(i, j)];
            }
        }
        GramMatrix { values, construction: GramConstruction::D2keRf, psd_certified: true }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn construction(&self) -> GramConstruction {
        self.construction
    }

    pub fn psd_certified(&self) -> bool {
        self.psd_certified
    }

    /// Smallest eigenvalue, via dense symmetric eigendecomposition.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eigs = symmetric_eigenvalues(&self.values)?;
        Ok(eigs.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// The two distance-substitution kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DskKind {
    Rbf,
    Nd,
}

/// The scalar behind `dsk_kernel`, exposed for cross-kernel blocks between
/// test and training points.
pub fn dsk_value(kind: DskKind, gamma: f64, d: f64) -> f64 {
    match kind {
        DskKind::Rbf => (-gamma * d * d).exp(),
        DskKind::Nd => -(d * d),
    }
}

/// Build a distance-substitution Gram from a pairwise distance matrix.
///
/// `dsk-rbf` gives `K_ij = exp(-gamma * D_ij^2)`; `dsk-nd` gives
/// `K_ij = -D_ij^2` (`gamma` unused). Neither is PSD-certified.
pub fn dsk_kernel(kind: DskKind, gamma: f64, d: &Array2<f64>) -> Result<GramMatrix> {
    validate_distance_matrix(d)?;
    if kind == DskKind::Rbf && !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    let values = d.mapv(|x| dsk_value(kind, gamma, x));
    let construction = match kind {
        DskKind::Rbf => GramConstruction::DskRbf,
        DskKind::Nd => GramConstruction::DskNd,
    };
    GramMatrix::new(values, construction, false)
}

/// Require a square, symmetric, zero-diagonal, non-negative, finite matrix.
pub fn validate_distance_matrix(d: &Array2<f64>) -> Result<()> {
    let (n, m) = d.dim();
    if n != m {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix must be square, got {n}x{m}"
        )));
    }
    let mut scale = 1.0f64;
    for &x in d.iter() {
        if !x.is_finite() {
            return Err(Error::Numerical("distance matrix has non-finite entries".into()));
        }
        if x < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "distance matrix has negative entry {x}"
            )));
        }
        scale = scale.max(x);
    }
    for i in 0..n {
        if d[(i, i)].abs() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "distance matrix diagonal entry ({i}, {i}) = {} is not zero",
                d[(i, i)]
            )));
        }
        for j in (i + 1)..n {
            if (d[(i, j)] - d[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "distance matrix asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Negative-eigenvalue handling for pseudo-Euclidean embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenTreatment {
    /// Zero out coordinates belonging to negative eigenvalues.
    Clip,
    /// Use `sqrt(|lambda|)` scaling, discarding the sign.
    Flip,
    /// Like flip, but the signed eigenvalues stay authoritative for any
    /// signature-aware consumer.
    KeepSigned,
}

impl EigenTreatment {
    pub fn tag(self) -> &'static str {
        match self {
            EigenTreatment::Clip => "clip",
            EigenTreatment::Flip => "flip",
            EigenTreatment::KeepSigned => "keep-signed",
        }
    }
}

impl std::fmt::Display for EigenTreatment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for EigenTreatment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" => Ok(EigenTreatment::Clip),
            "flip" => Ok(EigenTreatment::Flip),
            "keep-signed" => Ok(EigenTreatment::KeepSigned),
            other => Err(Error::Config(format!(
                "unknown eigen treatment `{other}` (expected clip, flip, or keep-signed)"
            ))),
        }
    }
}

/// Coordinates from the spectrum of the centered squared-distance matrix,
/// plus the centering data needed to embed new points consistently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoEuclideanEmbedding {
    coordinates: Array2<f64>,
    eigenvalues: Vec<f64>,
    treatment: EigenTreatment,
    eigvecs: Array2<f64>,
    row_means_sq: Vec<f64>,
    grand_mean_sq: f64,
}

impl PseudoEuclideanEmbedding {
    pub fn n(&self) -> usize {
        self.coordinates.nrows()
    }

    pub fn r(&self) -> usize {
        self.coordinates.ncols()
    }

    /// `n x r` coordinate matrix, columns ordered by descending `|lambda|`.
    pub fn coordinates(&self) -> &Array2<f64> {
        &self.coordinates
    }

    /// Signed eigenvalues matching the coordinate columns.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn treatment(&self) -> EigenTreatment {
        self.treatment
    }

    /// The embedding truncated to its leading `r` columns.
    pub fn truncated(&self, r: usize) -> Result<PseudoEuclideanEmbedding> {
        if r == 0 || r > self.r() {
            return Err(Error::InvalidArgument(format!(
                "truncation width {r} out of range for embedding of width {}",
                self.r()
            )));
        }
        Ok(PseudoEuclideanEmbedding {
            coordinates: self.coordinates.slice(ndarray::s![.., ..r]).to_owned(),
            eigenvalues: self.eigenvalues[..r].to_vec(),
            treatment: self.treatment,
            eigvecs: self.eigvecs.slice(ndarray::s![.., ..r]).to_owned(),
            row_means_sq: self.row_means_sq.clone(),
            grand_mean_sq: self.grand_mean_sq,
        })
    }

    /// Embed a new point from its distances to the training points.
    ///
    /// Applies the same double centering to the new squared distances and
    /// projects onto the stored eigenvectors; for a training point's own
    /// distance row this reproduces its training coordinates.
    pub fn extend(&self, dists_to_train: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if dists_to_train.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} distances to training points, got {}",
                dists_to_train.len()
            )));
        }
        if dists_to_train.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidArgument(
                "distances to training points must be finite and non-negative".into(),
            ));
        }
        let sq: Vec<f64> = dists_to_train.iter().map(|d| d * d).collect();
        let mean_sq = sq.iter().sum::<f64>() / n as f64;
        let b: Vec<f64> = (0..n)
            .map(|i| -0.5 * (sq[i] - self.row_means_sq[i] - mean_sq + self.grand_mean_sq))
            .collect();
        let lambda_scale = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &l| a.max(l.abs()))
            .max(1.0);
        let mut coords = vec![0.0; self.r()];
        for (k, coord) in coords.iter_mut().enumerate() {
            let lambda = self.eigenvalues[k];
            if lambda.abs() <= 1e-12 * lambda_scale {
                continue; // nullspace direction, coordinate stays 0
            }
            if self.treatment == EigenTreatment::Clip && lambda < 0.0 {
                continue; // clipped column
            }
            let proj: f64 = (0..n).map(|i| self.eigvecs[(i, k)] * b[i]).sum();
            *coord = proj / (lambda.signum() * lambda.abs().sqrt());
        }
        Ok(coords)
    }

    /// Distance between rows `i` and `j` reconstructed from coordinates.
    ///
    /// Under `keep-signed` the squared form is signature-weighted (negative
    /// eigenvalue columns subtract); the result is `sqrt(max(0, q))`.
    pub fn reconstructed_distance(&self, i: usize, j: usize) -> f64 {
        let mut q = 0.0;
        for k in 0..self.r() {
            let dc = self.coordinates[(i, k)] - self.coordinates[(j, k)];
            let sign = if self.treatment == EigenTreatment::KeepSigned {
                self.eigenvalues[k].signum()
            } else {
                1.0
            };
            q += sign * dc * dc;
        }
        q.max(0.0).sqrt()
    }
}

/// Classical-MDS-style embedding of a distance matrix.
///
/// Doubly centers the elementwise-squared distances
/// (`B = -1/2 * J D2 J`), eigendecomposes `B`, and keeps the `r` eigenpairs
/// of largest magnitude; coordinate column `k` is
/// `eigenvector_k * sqrt(|lambda_k|)` with negative-eigenvalue columns
/// handled per `treatment`.
pub fn pseudo_euclidean_embed(
    d: &Array2<f64>,
    r: usize,
    treatment: EigenTreatment,
) -> Result<PseudoEuclideanEmbedding> {
    validate_distance_matrix(d)?;
    let n = d.nrows();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "target dimension {r} out of range for {n} points"
        )));
    }
    let d2 = d.mapv(|x| x * x);
    let row_means_sq: Vec<f64> =
        d2.rows().into_iter().map(|row| row.sum() / n as f64).collect();
    let grand_mean_sq = row_means_sq.iter().sum::<f64>() / n as f64;
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] =
                -0.5 * (d2[(i, j)] - row_means_sq[i] - row_means_sq[j] + grand_mean_sq);
        }
    }
    let (eigenvalues_all, eigvecs_all) = symmetric_eigen(&b)?;

    // Order eigenpairs by descending magnitude, stable on the original index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &bb| {
        eigenvalues_all[bb]
            .abs()
            .partial_cmp(&eigenvalues_all[a].abs())
            .unwrap()
            .then(a.cmp(&bb))
    });
    let picked = &order[..r];

    let mut eigenvalues = Vec::with_capacity(r);
    let mut eigvecs = Array2::zeros((n, r));
    let mut coordinates = Array2::zeros((n, r));
    for (k, &idx) in picked.iter().enumerate() {
        let lambda = eigenvalues_all[idx];
        eigenvalues.push(lambda);
        let scale = if treatment == EigenTreatment::Clip && lambda < 0.0 {
            0.0
        } else {
            lambda.abs().sqrt()
        };
        for i in 0..n {
            eigvecs[(i, k)] = eigvecs_all[(i, idx)];
            coordinates[(i, k)] = eigvecs_all[(i, idx)] * scale;
        }
    }
    Ok(PseudoEuclideanEmbedding {
        coordinates,
        eigenvalues,
        treatment,
        eigvecs,
        row_means_sq,
        grand_mean_sq,
    })
}

/// Dense symmetric eigendecomposition: values and column eigenvectors.
fn symmetric_eigen(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = m.nrows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let diag_max = (0..n).fold(0.0f64, |a, i| a.max(m[(i, i)].abs()));
    let eig = nalgebra::SymmetricEigen::try_new(dm, f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric eigendecomposition failed to converge (n = {n}, max |diagonal| = {diag_max:.3e})"
        ))
    })?;
    let values: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, j)]);
    Ok((values, vectors))
}

fn symmetric_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    symmetric_eigen(m).map(|(values, _)| values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    /// Euclidean distance matrix of 1-d or 2-d point lists.
    fn euclidean_matrix(points: &[Vec<f64>]) -> Array2<f64> {
        let n = points.len();
        Array2::from_shape_fn((n, n), |(i, j)| {
            points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
    }

    #[test]
    fn gram_validation_catches_asymmetry_and_shape() {
        let bad = array![[1.0, 0.5], [0.4, 1.0]];
        assert!(GramMatrix::new(bad, GramConstruction::ExactMc, false).is_err());
        let rect = Array2::<f64>::zeros((2, 3));
        assert!(GramMatrix::new(rect, GramConstruction::ExactMc, false).is_err());
        let ok = array![[1.0, 0.5], [0.5, 1.0]];
        let g = GramMatrix::new(ok, GramConstruction::ExactMc, false).unwrap();
        assert_eq!(g.n(), 2);
    }

    #[test]
    fn feature_gram_is_psd() {
        let x = array![[0.6, 0.1], [0.2, 0.7], [0.5, 0.5]];
        let g = GramMatrix::from_features(&x);
        assert!(g.psd_certified());
        assert_eq!(g.construction(), GramConstruction::D2keRf);
        assert!(g.min_eigenvalue().unwrap() >= -1e-8);
    }

    #[test]
    fn dsk_rbf_values_and_diagonal() {
        let d = array![[0.0, 1.0], [1.0, 0.0]];
        let g = dsk_kernel(DskKind::Rbf, 1.0, &d).unwrap();
        assert_relative_eq!(g.values()[(0, 0)], 1.0);
        assert_relative_eq!(g.values()[(1, 1)], 1.0);
        assert_relative_eq!(g.values()[(0, 1)], (-1.0f64).exp(), max_relative = 1e-15);
        assert!(!g.psd_certified());
    }

    #[test]
    fn dsk_nd_is_negated_square_with_zero_diagonal() {
        let d = array![[0.0, 2.0], [2.0, 0.0]];
        let g = dsk_kernel(DskKind::Nd, 1.0, &d).unwrap();
        assert_eq!(g.values()[(0, 0)], 0.0);
        assert_eq!(g.values()[(1, 1)], 0.0);
        assert_relative_eq!(g.values()[(0, 1)], -4.0);
    }

    #[test]
    fn dsk_rejects_bad_distance_matrices() {
        let asym = array![[0.0, 1.0], [2.0, 0.0]];
        assert!(dsk_kernel(DskKind::Rbf, 1.0, &asym).is_err());
        let negative = array![[0.0, -1.0], [-1.0, 0.0]];
        assert!(dsk_kernel(DskKind::Rbf, 1.0, &negative).is_err());
        let dirty_diag = array![[0.5, 1.0], [1.0, 0.0]];
        assert!(dsk_kernel(DskKind::Nd, 1.0, &dirty_diag).is_err());
        let ok = array![[0.0, 1.0], [1.0, 0.0]];
        assert!(dsk_kernel(DskKind::Rbf, 0.0, &ok).is_err());
    }

    #[test]
    fn line_points_reconstruct_exactly() {
        // Colinear points 0, 1, 3: one dimension suffices.
        let d = euclidean_matrix(&[vec![0.0], vec![1.0], vec![3.0]]);
        let emb = pseudo_euclidean_embed(&d, 1, EigenTreatment::Clip).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    emb.reconstructed_distance(i, j),
                    d[(i, j)],
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn zero_distances_embed_to_origin() {
        let d = Array2::<f64>::zeros((4, 4));
        let emb = pseudo_euclidean_embed(&d, 2, EigenTreatment::Clip).unwrap();
        assert!(emb.coordinates().iter().all(|&c| c.abs() < 1e-12));
    }

    #[test]
    fn clip_coordinates_give_psd_gram() {
        // A non-Euclidean distance matrix (violates the triangle strongly).
        let d = array![
            [0.0, 1.0, 5.0, 1.0],
            [1.0, 0.0, 1.0, 4.0],
            [5.0, 1.0, 0.0, 1.0],
            [1.0, 4.0, 1.0, 0.0]
        ];
        let emb = pseudo_euclidean_embed(&d, 4, EigenTreatment::Clip).unwrap();
        let g = GramMatrix::from_features(emb.coordinates());
        assert!(g.min_eigenvalue().unwrap() >= -1e-8);
        // Flip treatment keeps magnitude in those columns instead.
        let flip = pseudo_euclidean_embed(&d, 4, EigenTreatment::Flip).unwrap();
        assert!(flip.eigenvalues().iter().any(|&l| l < 0.0));
    }

    #[test]
    fn columns_ordered_by_descending_magnitude() {
        let d = euclidean_matrix(&[
            vec![0.0, 0.0],
            vec![10.0, 0.1],
            vec![-3.0, 0.3],
            vec![6.0, -0.2],
        ]);
        let emb = pseudo_euclidean_embed(&d, 4, EigenTreatment::KeepSigned).unwrap();
        let mags: Vec<f64> = emb.eigenvalues().iter().map(|l| l.abs()).collect();
        assert!(mags.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn extension_reproduces_training_coordinates() {
        let points = [vec![0.0, 0.0], vec![2.0, 1.0], vec![-1.0, 3.0], vec![4.0, -2.0]];
        let d = euclidean_matrix(&points);
        for treatment in [EigenTreatment::Clip, EigenTreatment::Flip] {
            let emb = pseudo_euclidean_embed(&d, 2, treatment).unwrap();
            for i in 0..points.len() {
                let row: Vec<f64> = (0..points.len()).map(|j| d[(i, j)]).collect();
                let coords = emb.extend(&row).unwrap();
                for k in 0..2 {
                    assert_relative_eq!(
                        coords[k],
                        emb.coordinates()[(i, k)],
                        epsilon = 1e-8
                    );
                }
            }
        }
    }

    #[test]
    fn extension_places_new_point_consistently() {
        // Embed three of four square corners, extend to the fourth; its
        // reconstructed distances to the training points must match.
        let points = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let d = euclidean_matrix(&points);
        let emb = pseudo_euclidean_embed(&d, 2, EigenTreatment::Clip).unwrap();
        let new_point = [1.0, 1.0];
        let dists: Vec<f64> = points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&new_point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let coords = emb.extend(&dists).unwrap();
        for (i, point) in points.iter().enumerate() {
            let recon: f64 = (0..2)
                .map(|k| (coords[k] - emb.coordinates()[(i, k)]).powi(2))
                .sum::<f64>()
                .sqrt();
            let true_d: f64 = point
                .iter()
                .zip(&new_point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert_relative_eq!(recon, true_d, epsilon = 1e-8);
        }
    }

    #[test]
    fn truncated_embedding_is_column_prefix() {
        let d = euclidean_matrix(&[vec![0.0, 0.0], vec![3.0, 1.0], vec![1.0, 4.0]]);
        let full = pseudo_euclidean_embed(&d, 3, EigenTreatment::Clip).unwrap();
        let cut = full.truncated(2).unwrap();
        assert_eq!(cut.r(), 2);
        for i in 0..3 {
            for k in 0..2 {
                assert_eq!(cut.coordinates()[(i, k)], full.coordinates()[(i, k)]);
            }
        }
        assert!(full.truncated(0).is_err());
        assert!(full.truncated(4).is_err());
    }

    #[test]
    fn target_dimension_bounds_checked() {
        let d = Array2::<f64>::zeros((3, 3));
        assert!(pseudo_euclidean_embed(&d, 0, EigenTreatment::Clip).is_err());
        assert!(pseudo_euclidean_embed(&d, 4, EigenTreatment::Clip).is_err());
    }
}
