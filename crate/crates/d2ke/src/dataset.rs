//! Labeled collections of structured objects and stratified splitting.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objects::{ObjectKind, StructuredObject};
use crate::seeding::{stream_rng, STREAM_SPLIT};

/// Which portion of an experiment a dataset represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitTag {
    /// Not yet split (freshly loaded or generated).
    Full,
    Train,
    Test,
}

impl std::fmt::Display for SplitTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitTag::Full => "full",
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        })
    }
}

/// Provenance carried alongside a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Where the data came from (file path or generator description).
    pub source: String,
    /// FNV-1a checksum of the canonical object encoding, as hex.
    pub checksum: String,
    /// Original label for each contiguous class index.
    pub label_map: Vec<i64>,
    /// Free-form annotations (generator parameters, preprocessing notes).
    pub notes: BTreeMap<String, String>,
}

/// A labeled dataset of structured objects of one kind.
///
/// Labels are stored as contiguous class indices `0..n_classes`; the original
/// label values are kept in [`DatasetMeta::label_map`], ordered ascending, so
/// writers can emit the original labels again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    objects: Vec<StructuredObject>,
    labels: Vec<usize>,
    split_tag: SplitTag,
    meta: DatasetMeta,
}

impl Dataset {
    /// Build a dataset from objects and raw (possibly non-contiguous) labels.
    ///
    /// Labels are remapped to contiguous indices by ascending original value.
    /// All objects must share one kind, counts must match, and the dataset
    /// must be non-empty.
    pub fn from_raw_labels(
        objects: Vec<StructuredObject>,
        raw_labels: Vec<i64>,
        source: String,
    ) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::EmptyDataset(source));
        }
        if objects.len() != raw_labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} objects but {} labels",
                objects.len(),
                raw_labels.len()
            )));
        }
        let kind = objects[0].kind();
        if let Some(bad) = objects.iter().find(|o| o.kind() != kind) {
            return Err(Error::KindMismatch { expected: kind, got: bad.kind() });
        }
        let mut label_map: Vec<i64> = raw_labels.clone();
        label_map.sort_unstable();
        label_map.dedup();
        let index_of: BTreeMap<i64, usize> =
            label_map.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let labels: Vec<usize> = raw_labels.iter().map(|l| index_of[l]).collect();
        let checksum = checksum_hex(&objects, &raw_labels);
        Ok(Dataset {
            objects,
            labels,
            split_tag: SplitTag::Full,
            meta: DatasetMeta { source, checksum, label_map, notes: BTreeMap::new() },
        })
    }

    /// Build from objects whose labels are already contiguous class indices.
    pub fn from_class_indices(
        objects: Vec<StructuredObject>,
        labels: Vec<usize>,
        source: String,
    ) -> Result<Self> {
        let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
        let ds = Dataset::from_raw_labels(objects, raw, source)?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn kind(&self) -> ObjectKind {
        self.objects[0].kind()
    }

    pub fn objects(&self) -> &[StructuredObject] {
        &self.objects
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.meta.label_map.len()
    }

    pub fn split_tag(&self) -> SplitTag {
        self.split_tag
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut DatasetMeta {
        &mut self.meta
    }

    /// Original label value for a contiguous class index.
    pub fn original_label(&self, class: usize) -> i64 {
        self.meta.label_map[class]
    }

    /// Number of objects in each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// The dataset restricted to `indices`, preserving order and label map.
    ///
    /// The subset keeps the full label map even if some class disappears, so
    /// class indices stay comparable across subsets.
    pub fn subset(&self, indices: &[usize], tag: SplitTag) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset(format!(
                "subset of {} selects no objects",
                self.meta.source
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidArgument(format!(
                "subset index {bad} out of range for dataset of {}",
                self.len()
            )));
        }
        let objects: Vec<StructuredObject> =
            indices.iter().map(|&i| self.objects[i].clone()).collect();
        let labels: Vec<usize> = indices.iter().map(|&i| self.labels[i]).collect();
        let raw: Vec<i64> = labels.iter().map(|&l| self.meta.label_map[l]).collect();
        let checksum = checksum_hex(&objects, &raw);
        Ok(Dataset {
            objects,
            labels,
            split_tag: tag,
            meta: DatasetMeta {
                source: self.meta.source.clone(),
                checksum,
                label_map: self.meta.label_map.clone(),
                notes: self.meta.notes.clone(),
            },
        })
    }

    /// The dataset with every object replaced by `f(object)`.
    ///
    /// Labels, label map, split tag, and notes are preserved; the checksum
    /// is recomputed from the new objects.
    pub fn map_objects(
        &self,
        f: impl Fn(&StructuredObject) -> Result<StructuredObject>,
    ) -> Result<Dataset> {
        let objects: Vec<StructuredObject> =
            self.objects.iter().map(&f).collect::<Result<_>>()?;
        let kind = objects[0].kind();
        if let Some(bad) = objects.iter().find(|o| o.kind() != kind) {
            return Err(Error::KindMismatch { expected: kind, got: bad.kind() });
        }
        let raw: Vec<i64> = self.labels.iter().map(|&l| self.meta.label_map[l]).collect();
        let checksum = checksum_hex(&objects, &raw);
        Ok(Dataset {
            objects,
            labels: self.labels.clone(),
            split_tag: self.split_tag,
            meta: DatasetMeta { checksum, ..self.meta.clone() },
        })
    }

    /// Stratified train/test split.
    ///
    /// The train split receives `round(fraction * n)` objects, apportioned
    /// across classes by largest remainder so per-class proportions track
    /// `fraction` as closely as integer counts allow. Shuffling within each
    /// class is seeded, so the split is reproducible. Errors if either side
    /// would be empty.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(0.0..=1.0).contains(&fraction) || !fraction.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "train fraction must lie in [0, 1], got {fraction}"
            )));
        }
        let n = self.len();
        let target_train = (fraction * n as f64).round() as usize;
        if target_train == 0 || target_train == n {
            return Err(Error::InvalidArgument(format!(
                "train fraction {fraction} leaves an empty split for {n} objects"
            )));
        }

        // Per-class index pools, shuffled deterministically.
        let mut pools: Vec<Vec<usize>> = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            pools[l].push(i);
        }
        for (class, pool) in pools.iter_mut().enumerate() {
            let mut rng = stream_rng(seed, STREAM_SPLIT, class as u64);
            pool.shuffle(&mut rng);
        }

        // Largest-remainder apportionment of the train quota across classes.
        let mut take: Vec<usize> = Vec::with_capacity(pools.len());
        let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(pools.len());
        let mut base_total = 0usize;
        for (class, pool) in pools.iter().enumerate() {
            let exact = fraction * pool.len() as f64;
            let base = exact.floor() as usize;
            take.push(base.min(pool.len()));
            remainders.push((class, exact - base as f64));
            base_total += take[class];
        }
        remainders.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0))
        });
        let mut extra = target_train.saturating_sub(base_total);
        for &(class, _) in &remainders {
            if extra == 0 {
                break;
            }
            if take[class] < pools[class].len() {
                take[class] += 1;
                extra -= 1;
            }
        }

        let mut train_idx = Vec::with_capacity(target_train);
        let mut test_idx = Vec::with_capacity(n - target_train);
        for (class, pool) in pools.iter().enumerate() {
            train_idx.extend_from_slice(&pool[..take[class]]);
            test_idx.extend_from_slice(&pool[take[class]..]);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        if train_idx.is_empty() || test_idx.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "train fraction {fraction} leaves an empty split for {n} objects"
            )));
        }
        let train = self.subset(&train_idx, SplitTag::Train)?;
        let test = self.subset(&test_idx, SplitTag::Test)?;
        Ok((train, test))
    }
}

/// FNV-1a over a canonical byte encoding of objects and labels.
fn checksum_hex(objects: &[StructuredObject], raw_labels: &[i64]) -> String {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    for (obj, &label) in objects.iter().zip(raw_labels) {
        eat(&label.to_le_bytes());
        match obj {
            StructuredObject::TimeSeries(t) => {
                eat(&[0u8]);
                eat(&(t.len() as u64).to_le_bytes());
                eat(&(t.n_variables() as u64).to_le_bytes());
                for x in t.values().iter() {
                    eat(&x.to_bits().to_le_bytes());
                }
            }
            StructuredObject::String(s) => {
                eat(&[1u8]);
                eat(&(s.alphabet_size() as u64).to_le_bytes());
                eat(&(s.len() as u64).to_le_bytes());
                for &sym in s.symbols() {
                    eat(&sym.to_le_bytes());
                }
            }
            StructuredObject::VectorSet(v) => {
                eat(&[2u8]);
                eat(&(v.len() as u64).to_le_bytes());
                eat(&(v.dim() as u64).to_le_bytes());
                for x in v.elements().iter() {
                    eat(&x.to_bits().to_le_bytes());
                }
            }
        }
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::SymbolString;

    fn string_dataset(labels: &[i64]) -> Dataset {
        let objects: Vec<StructuredObject> = labels
            .iter()
            .enumerate()
            .map(|(i, _)| SymbolString::new(vec![(i % 3) as u32], 3).unwrap().into())
            .collect();
        Dataset::from_raw_labels(objects, labels.to_vec(), "test".into()).unwrap()
    }

    #[test]
    fn labels_remap_to_contiguous_sorted() {
        let ds = string_dataset(&[7, -2, 7, 100]);
        assert_eq!(ds.n_classes(), 3);
        assert_eq!(ds.meta().label_map, vec![-2, 7, 100]);
        assert_eq!(ds.labels(), &[1, 0, 1, 2]);
        assert_eq!(ds.original_label(0), -2);
    }

    #[test]
    fn empty_dataset_rejected() {
        let err = Dataset::from_raw_labels(vec![], vec![], "x".into());
        assert!(matches!(err, Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let objects = vec![
            SymbolString::new(vec![0], 2).unwrap().into(),
            crate::objects::TimeSeries::from_rows(vec![vec![0.0]]).unwrap().into(),
        ];
        let err = Dataset::from_raw_labels(objects, vec![0, 1], "x".into());
        assert!(matches!(err, Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn split_sizes_and_stratification() {
        // 10 objects, fraction 0.7: exactly 7 train and 3 test.
        let ds = string_dataset(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let (train, test) = ds.split(0.7, 11).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(test.len(), 3);
        assert_eq!(train.split_tag(), SplitTag::Train);
        assert_eq!(test.split_tag(), SplitTag::Test);

        // 5+5 at fraction 0.6: both classes present on both sides.
        let (train, test) = ds.split(0.6, 3).unwrap();
        assert_eq!(train.len(), 6);
        let tr = train.class_counts();
        let te = test.class_counts();
        assert!(tr.iter().all(|&c| c > 0));
        assert!(te.iter().all(|&c| c > 0));
        assert_eq!(tr, vec![3, 3]);
        assert_eq!(te, vec![2, 2]);
    }

    #[test]
    fn split_partition_is_exact() {
        let ds = string_dataset(&[0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2]);
        let (train, test) = ds.split(0.7, 5).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        // Every original object appears exactly once across the two splits.
        let mut seen: Vec<(Vec<u32>, usize)> = Vec::new();
        for part in [&train, &test] {
            for (obj, &label) in part.objects().iter().zip(part.labels()) {
                seen.push((obj.as_string().unwrap().symbols().to_vec(), label));
            }
        }
        assert_eq!(seen.len(), ds.len());
    }

    #[test]
    fn split_rejects_empty_side() {
        let ds = string_dataset(&[0, 1]);
        assert!(ds.split(0.999, 1).is_err());
        assert!(ds.split(0.001, 1).is_err());
        assert!(ds.split(1.5, 1).is_err());
    }

    #[test]
    fn split_is_seed_deterministic() {
        let ds = string_dataset(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let (a_train, a_test) = ds.split(0.5, 9).unwrap();
        let (b_train, b_test) = ds.split(0.5, 9).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
        let (c_train, _) = ds.split(0.5, 10).unwrap();
        // A different seed may pick a different subset; only require validity.
        assert_eq!(c_train.len(), 4);
    }

    #[test]
    fn subset_keeps_label_map() {
        let ds = string_dataset(&[5, 9, 5, 9]);
        let sub = ds.subset(&[0, 2], SplitTag::Train).unwrap();
        assert_eq!(sub.n_classes(), 2);
        assert_eq!(sub.labels(), &[0, 0]);
        assert_eq!(sub.original_label(1), 9);
        assert!(ds.subset(&[], SplitTag::Train).is_err());
        assert!(ds.subset(&[99], SplitTag::Train).is_err());
    }

    #[test]
    fn checksum_tracks_content() {
        let a = string_dataset(&[0, 1]);
        let b = string_dataset(&[0, 1]);
        assert_eq!(a.meta().checksum, b.meta().checksum);
        let c = string_dataset(&[1, 0]);
        assert_ne!(a.meta().checksum, c.meta().checksum);
    }
}
