//! Landmark ("omega") distributions and deterministic draws from them.
//!
//! A feature map needs `R` random landmark objects. They can come from a
//! synthetic generator over the object domain (random series, strings, or
//! vector sets) or from held-out training data. Draw `j` depends only on the
//! sample seed and `j`, so draws are order-independent and a sample of size
//! `R1` is a prefix of a sample of size `R2 > R1` under the same seed.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objects::{ObjectKind, StructuredObject, SymbolString, TimeSeries, VectorSet};
use crate::seeding::{stream_rng, STREAM_HOLDOUT, STREAM_OMEGA};

/// A distribution over landmark objects.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaDistribution {
    /// Series with uniform length in `[length_min, length_max]` and i.i.d.
    /// Gaussian entries of standard deviation `element_std`.
    RandomTimeSeries {
        length_min: usize,
        length_max: usize,
        n_variables: usize,
        element_std: f64,
    },
    /// Strings with uniform length in `[length_min, length_max]` and symbols
    /// uniform over the alphabet.
    RandomString {
        length_min: usize,
        length_max: usize,
        alphabet_size: u32,
    },
    /// Sets with uniform size in `[size_min, size_max]` and elements uniform
    /// on the unit sphere in `R^dim`.
    RandomVectorSet {
        size_min: usize,
        size_max: usize,
        dim: usize,
    },
    /// Landmarks drawn from a source dataset, with or without replacement.
    DataHoldout {
        source: Dataset,
        without_replacement: bool,
    },
}

impl OmegaDistribution {
    /// The kind of object this distribution produces.
    pub fn object_kind(&self) -> ObjectKind {
        match self {
            OmegaDistribution::RandomTimeSeries { .. } => ObjectKind::TimeSeries,
            OmegaDistribution::RandomString { .. } => ObjectKind::String,
            OmegaDistribution::RandomVectorSet { .. } => ObjectKind::VectorSet,
            OmegaDistribution::DataHoldout { source, .. } => source.kind(),
        }
    }

    /// Serializable description of this distribution.
    pub fn spec(&self) -> OmegaSpec {
        match self {
            OmegaDistribution::RandomTimeSeries {
                length_min,
                length_max,
                n_variables,
                element_std,
            } => OmegaSpec::RandomTimeSeries {
                length_min: *length_min,
                length_max: *length_max,
                n_variables: *n_variables,
                element_std: *element_std,
            },
            OmegaDistribution::RandomString { length_min, length_max, alphabet_size } => {
                OmegaSpec::RandomString {
                    length_min: *length_min,
                    length_max: *length_max,
                    alphabet_size: *alphabet_size,
                }
            }
            OmegaDistribution::RandomVectorSet { size_min, size_max, dim } => {
                OmegaSpec::RandomVectorSet {
                    size_min: *size_min,
                    size_max: *size_max,
                    dim: *dim,
                }
            }
            OmegaDistribution::DataHoldout { source, without_replacement } => {
                OmegaSpec::DataHoldout {
                    source_checksum: source.meta().checksum.clone(),
                    source_len: source.len(),
                    without_replacement: *without_replacement,
                }
            }
        }
    }

    fn validate(&self, r: usize) -> Result<()> {
        if r == 0 {
            return Err(Error::InvalidArgument(
                "landmark count must be at least 1".into(),
            ));
        }
        match self {
            OmegaDistribution::RandomTimeSeries {
                length_min,
                length_max,
                n_variables,
                element_std,
            } => {
                if *length_min == 0 || length_min > length_max {
                    return Err(Error::InvalidArgument(format!(
                        "series length range [{length_min}, {length_max}] is invalid"
                    )));
                }
                if *n_variables == 0 {
                    return Err(Error::InvalidArgument(
                        "series landmarks need at least one variable".into(),
                    ));
                }
                if !(element_std.is_finite() && *element_std > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "element standard deviation must be positive, got {element_std}"
                    )));
                }
            }
            OmegaDistribution::RandomString { length_min, length_max, alphabet_size } => {
                if length_min > length_max {
                    return Err(Error::InvalidArgument(format!(
                        "string length range [{length_min}, {length_max}] is invalid"
                    )));
                }
                if *alphabet_size == 0 {
                    return Err(Error::InvalidArgument(
                        "alphabet size must be at least 1".into(),
                    ));
                }
            }
            OmegaDistribution::RandomVectorSet { size_min, size_max, dim } => {
                if *size_min == 0 || size_min > size_max {
                    return Err(Error::InvalidArgument(format!(
                        "set size range [{size_min}, {size_max}] is invalid"
                    )));
                }
                if *dim == 0 {
                    return Err(Error::InvalidArgument(
                        "set elements need dimension at least 1".into(),
                    ));
                }
            }
            OmegaDistribution::DataHoldout { source, without_replacement } => {
                if *without_replacement && r > source.len() {
                    return Err(Error::InvalidArgument(format!(
                        "cannot draw {r} landmarks without replacement from {} objects",
                        source.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Serializable description of an [`OmegaDistribution`].
///
/// Holdout sources are described by checksum and size rather than embedded,
/// since the sampled objects themselves are stored alongside this spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OmegaSpec {
    RandomTimeSeries {
        length_min: usize,
        length_max: usize,
        n_variables: usize,
        element_std: f64,
    },
    RandomString {
        length_min: usize,
        length_max: usize,
        alphabet_size: u32,
    },
    RandomVectorSet {
        size_min: usize,
        size_max: usize,
        dim: usize,
    },
    DataHoldout {
        source_checksum: String,
        source_len: usize,
        without_replacement: bool,
    },
}

/// A drawn set of landmarks plus the seed and spec that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSample {
    objects: Vec<StructuredObject>,
    seed: u64,
    spec: OmegaSpec,
}

impl OmegaSample {
    pub fn objects(&self) -> &[StructuredObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> &OmegaSpec {
        &self.spec
    }

    pub fn kind(&self) -> ObjectKind {
        self.objects[0].kind()
    }

    /// The sample truncated to its first `r` landmarks.
    pub fn prefix(&self, r: usize) -> Result<OmegaSample> {
        if r == 0 || r > self.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix size {r} out of range for sample of {}",
                self.len()
            )));
        }
        Ok(OmegaSample {
            objects: self.objects[..r].to_vec(),
            seed: self.seed,
            spec: self.spec.clone(),
        })
    }

    /// Rebuild a sample from parts (used by the file loader).
    pub fn from_parts(
        objects: Vec<StructuredObject>,
        seed: u64,
        spec: OmegaSpec,
    ) -> Result<OmegaSample> {
        if objects.is_empty() {
            return Err(Error::EmptyDataset("landmark sample".into()));
        }
        let kind = objects[0].kind();
        if let Some(bad) = objects.iter().find(|o| o.kind() != kind) {
            return Err(Error::KindMismatch { expected: kind, got: bad.kind() });
        }
        Ok(OmegaSample { objects, seed, spec })
    }
}

/// Draw `r` landmarks from `dist` under `seed`.
pub fn sample_omegas(dist: &OmegaDistribution, r: usize, seed: u64) -> Result<OmegaSample> {
    dist.validate(r)?;
    let objects: Vec<StructuredObject> = match dist {
        OmegaDistribution::DataHoldout { source, without_replacement } => {
            holdout_indices(source.len(), r, seed, *without_replacement)?
                .into_iter()
                .map(|i| source.objects()[i].clone())
                .collect()
        }
        _ => (0..r).map(|j| draw_one(dist, seed, j as u64)).collect::<Result<_>>()?,
    };
    Ok(OmegaSample { objects, seed, spec: dist.spec() })
}

/// The index draw behind holdout landmark sampling, exposed so callers
/// holding a precomputed distance matrix can select the same landmarks
/// from an index set.
///
/// Without replacement the result is the first `r` entries of one seeded
/// permutation of `0..n`; with replacement entry `j` is an independent
/// uniform draw keyed by `j`. Both modes are prefix-stable in `r`.
pub fn holdout_indices(
    n: usize,
    r: usize,
    seed: u64,
    without_replacement: bool,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyDataset("holdout source".into()));
    }
    if r == 0 {
        return Err(Error::InvalidArgument(
            "landmark count must be at least 1".into(),
        ));
    }
    if without_replacement {
        if r > n {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {r} landmarks without replacement from {n} objects"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = stream_rng(seed, STREAM_HOLDOUT, 0);
        // Fisher-Yates; any prefix of the permutation is stable in r.
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        order.truncate(r);
        Ok(order)
    } else {
        Ok((0..r)
            .map(|j| stream_rng(seed, STREAM_OMEGA, j as u64).random_range(0..n))
            .collect())
    }
}

fn draw_one(dist: &OmegaDistribution, seed: u64, index: u64) -> Result<StructuredObject> {
    let mut rng = stream_rng(seed, STREAM_OMEGA, index);
    match dist {
        OmegaDistribution::RandomTimeSeries {
            length_min,
            length_max,
            n_variables,
            element_std,
        } => {
            let len = rng.random_range(*length_min..=*length_max);
            let normal = Normal::new(0.0, *element_std)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let rows: Vec<Vec<f64>> = (0..len)
                .map(|_| (0..*n_variables).map(|_| normal.sample(&mut rng)).collect())
                .collect();
            Ok(TimeSeries::from_rows(rows)?.into())
        }
        OmegaDistribution::RandomString { length_min, length_max, alphabet_size } => {
            let len = rng.random_range(*length_min..=*length_max);
            let symbols: Vec<u32> =
                (0..len).map(|_| rng.random_range(0..*alphabet_size)).collect();
            Ok(SymbolString::new(symbols, *alphabet_size)?.into())
        }
        OmegaDistribution::RandomVectorSet { size_min, size_max, dim } => {
            let size = rng.random_range(*size_min..=*size_max);
            let rows: Vec<Vec<f64>> =
                (0..size).map(|_| unit_sphere_vector(*dim, &mut rng)).collect();
            Ok(VectorSet::from_rows(rows)?.into())
        }
        OmegaDistribution::DataHoldout { .. } => {
            unreachable!("holdout draws go through holdout_indices")
        }
    }
}

/// A vector uniform on the unit sphere in `R^p` (normalized Gaussian draw).
pub fn unit_sphere_vector(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(p >= 1, "sphere dimension must be at least 1");
    let normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v: Vec<f64> = (0..p).map(|_| normal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
