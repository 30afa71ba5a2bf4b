//! k-nearest-neighbour classification directly over a dissimilarity.
//! Fully deterministic: neighbour ties break on the lower training index
//! and vote ties on the lower class.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distance::Measure;
use crate::error::{Error, Result};
use crate::objects::StructuredObject;

/// Majority vote among the `k` nearest entries of a distance row.
///
/// Rows are ranked by `(distance, index)`; among tied vote counts the
/// lowest class index wins.
pub fn vote_from_distances(
    dists: &[f64],
    labels: &[usize],
    n_classes: usize,
    k: usize,
) -> Result<usize> {
    let n = dists.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} distances but {} labels",
            labels.len()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k must be in [1, {n}], got {k}"
        )));
    }
    if dists.iter().any(|d| !d.is_finite()) {
        return Err(Error::Numerical("non-finite neighbour distance".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::InvalidArgument(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b)));
    let mut votes = vec![0usize; n_classes];
    for &i in &order[..k] {
        votes[labels[i]] += 1;
    }
    let mut best = 0;
    for c in 1..n_classes {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Nearest-neighbour classifier holding its training set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    train: Dataset,
    k: usize,
    measure: Measure,
}

impl KnnModel {
    pub fn new(train: Dataset, k: usize, measure: Measure) -> Result<Self> {
        if k == 0 || k > train.len() {
            return Err(Error::InvalidArgument(format!(
                "k must be in [1, {}], got {k}",
                train.len()
            )));
        }
        if measure.object_kind() != train.kind() {
            return Err(Error::KindMismatch {
                expected: measure.object_kind(),
                got: train.kind(),
            });
        }
        Ok(KnnModel { train, k, measure })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn predict(&self, x: &StructuredObject) -> Result<usize> {
        let dists = self
            .train
            .objects()
            .iter()
            .map(|o| self.measure.evaluate(x, o))
            .collect::<Result<Vec<f64>>>()?;
        vote_from_distances(&dists, self.train.labels(), self.train.n_classes(), self.k)
    }

    pub fn predict_batch(&self, xs: &[StructuredObject]) -> Result<Vec<usize>> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SplitTag;
    use crate::objects::SymbolString;

    fn string_object(symbols: &[u32]) -> StructuredObject {
        StructuredObject::String(SymbolString::new(symbols.to_vec(), 2).unwrap())
    }

    fn two_symbol_train() -> Dataset {
        // "aa" -> 0, "ab" -> 0, "bb" -> 1 over the alphabet {a, b}.
        let objects = vec![
            string_object(&[0, 0]),
            string_object(&[0, 1]),
            string_object(&[1, 1]),
        ];
        Dataset::from_class_indices(objects, vec![0, 0, 1], "knn-test".into())
            .unwrap()
            .subset(&[0, 1, 2], SplitTag::Train)
            .unwrap()
    }

    #[test]
    fn nearest_neighbour_breaks_distance_ties_by_index() {
        // "ba" is at edit distance 1 from both "aa" (index 0) and "bb"
        // (index 2); the lower index wins, giving class 0.
        let model = KnnModel::new(two_symbol_train(), 1, Measure::Edit).unwrap();
        assert_eq!(model.predict(&string_object(&[1, 0])).unwrap(), 0);
    }

    #[test]
    fn three_neighbour_vote() {
        let model = KnnModel::new(two_symbol_train(), 3, Measure::Edit).unwrap();
        assert_eq!(model.predict(&string_object(&[1, 0])).unwrap(), 0);
        assert_eq!(model.predict(&string_object(&[1, 1])).unwrap(), 0);
    }

    #[test]
    fn vote_ties_prefer_lower_class() {
        let pred = vote_from_distances(&[1.0, 2.0], &[1, 0], 2, 2).unwrap();
        assert_eq!(pred, 0);
        let pred = vote_from_distances(&[1.0, 2.0, 3.0, 4.0], &[2, 1, 2, 1], 3, 4).unwrap();
        assert_eq!(pred, 1);
    }

    #[test]
    fn batch_matches_single_predictions() {
        let model = KnnModel::new(two_symbol_train(), 3, Measure::Edit).unwrap();
        let queries = vec![
            string_object(&[0, 0]),
            string_object(&[1, 0]),
            string_object(&[1, 1, 1]),
        ];
        let batch = model.predict_batch(&queries).unwrap();
        let singles: Vec<usize> =
            queries.iter().map(|q| model.predict(q).unwrap()).collect();
        assert_eq!(batch, singles);
    }

    #[test]
    fn construction_validates_k_and_kind() {
        assert!(KnnModel::new(two_symbol_train(), 0, Measure::Edit).is_err());
        assert!(KnnModel::new(two_symbol_train(), 4, Measure::Edit).is_err());
        assert!(KnnModel::new(two_symbol_train(), 1, Measure::Dtw).is_err());
    }

    #[test]
    fn vote_rejects_bad_inputs() {
        assert!(vote_from_distances(&[1.0], &[0, 1], 2, 1).is_err());
        assert!(vote_from_distances(&[1.0, 2.0], &[0, 1], 2, 0).is_err());
        assert!(vote_from_distances(&[1.0, 2.0], &[0, 1], 2, 3).is_err());
        assert!(vote_from_distances(&[f64::NAN, 2.0], &[0, 1], 2, 1).is_err());
        assert!(vote_from_distances(&[1.0, 2.0], &[0, 5], 2, 1).is_err());
    }
}
