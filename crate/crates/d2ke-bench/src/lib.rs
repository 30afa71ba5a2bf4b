//! Shared object generators for the benchmark targets.

use d2ke::sampling::sample_omegas;
use d2ke::{OmegaDistribution, StructuredObject};

/// Strings of a fixed length over a 4-symbol alphabet.
pub fn strings(n: usize, len: usize, seed: u64) -> Vec<StructuredObject> {
    let dist = OmegaDistribution::RandomString {
        length_min: len,
        length_max: len,
        alphabet_size: 4,
    };
    sample_omegas(&dist, n, seed).expect("fixed-shape draw").objects().to_vec()
}

/// Univariate series of a fixed length.
pub fn series(n: usize, len: usize, seed: u64) -> Vec<StructuredObject> {
    let dist = OmegaDistribution::RandomTimeSeries {
        length_min: len,
        length_max: len,
        n_variables: 1,
        element_std: 1.0,
    };
    sample_omegas(&dist, n, seed).expect("fixed-shape draw").objects().to_vec()
}

/// Vector sets of a fixed size with 3-dimensional elements.
pub fn vector_sets(n: usize, size: usize, seed: u64) -> Vec<StructuredObject> {
    let dist = OmegaDistribution::RandomVectorSet { size_min: size, size_max: size, dim: 3 };
    sample_omegas(&dist, n, seed).expect("fixed-shape draw").objects().to_vec()
}
