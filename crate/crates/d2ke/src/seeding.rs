//! Deterministic seed derivation.
//!
//! Every source of randomness in the crate draws from its own ChaCha8 stream
//! whose seed is derived from the master seed, a stream label, and an index.
//! Because each landmark, fold shuffle, or synthetic sample gets an
//! independent derived seed, results do not depend on thread count or on the
//! order in which work items are executed, and a prefix of a larger draw
//! equals a smaller draw with the same seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream label for landmark draws.
pub const STREAM_OMEGA: u64 = 0x6f6d656761; // "omega"
/// Stream label for the without-replacement holdout permutation.
pub const STREAM_HOLDOUT: u64 = 0x686f6c64; // "hold"
/// Stream label for synthetic data generation.
pub const STREAM_SYNTH: u64 = 0x73796e7468; // "synth"
/// Stream label for train/test splits.
pub const STREAM_SPLIT: u64 = 0x73706c6974; // "split"
/// Stream label for cross-validation fold assignment.
pub const STREAM_FOLDS: u64 = 0x666f6c6473; // "folds"
/// Stream label for convergence-sweep trial draws.
pub const STREAM_SWEEP: u64 = 0x7377656570; // "sweep"
/// Stream label for convergence-sweep reference draws (disjoint from trials).
pub const STREAM_SWEEP_REF: u64 = 0x7377726566; // "swref"
/// Stream label for per-method experiment seeds.
pub const STREAM_METHOD: u64 = 0x6d657468; // "meth"
/// Stream label for timing-report data draws.
pub const STREAM_TIMING: u64 = 0x74696d65; // "time"

/// SplitMix64 finalizer: a cheap bijective mixer with full avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the seed for item `index` of stream `stream` under `master`.
#[inline]
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix64(master ^ mix64(stream ^ mix64(index)))
}

/// RNG for item `index` of stream `stream` under `master`.
pub fn stream_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn mix64_is_deterministic_and_nontrivial() {
        assert_eq!(mix64(0), mix64(0));
        assert_ne!(mix64(0), 0);
        assert_ne!(mix64(1), mix64(2));
    }

    #[test]
    fn derived_seeds_differ_across_streams_and_indices() {
        let master = 42;
        let a = derive_seed(master, STREAM_OMEGA, 0);
        let b = derive_seed(master, STREAM_OMEGA, 1);
        let c = derive_seed(master, STREAM_SPLIT, 0);
        let d = derive_seed(master ^ 1, STREAM_OMEGA, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn stream_rng_reproduces() {
        let mut r1 = stream_rng(7, STREAM_OMEGA, 3);
        let mut r2 = stream_rng(7, STREAM_OMEGA, 3);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
