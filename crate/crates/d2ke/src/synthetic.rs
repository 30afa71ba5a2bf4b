//! Seeded synthetic classification tasks, one per object kind.
//!
//! Desk-scale stand-ins for benchmark corpora: each task has a planted,
//! learnable class structure visible to the matching dissimilarity measure.
//! Generation derives one RNG per sample index, so datasets are reproducible
//! bitwise and independent of evaluation order.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::objects::{StructuredObject, SymbolString, TimeSeries, VectorSet};
use crate::seeding::{stream_rng, STREAM_SYNTH};

/// Alphabet size for the motif-string task.
const MOTIF_ALPHABET: u32 = 6;
/// The planted motif marking class 1.
const MOTIF: [u32; 3] = [0, 1, 2];
/// String length range for the motif-string task. Short relative to the
/// motif, so the planted block dominates the edit geometry.
const MOTIF_LEN: (usize, usize) = (5, 7);
/// Series length range for the shifted-sine task.
const SINE_LEN: (usize, usize) = (20, 40);
/// Frequency bands (cycles per 16 steps) for the two sine classes.
const SINE_BANDS: [(f64, f64); 2] = [(0.8, 1.2), (2.0, 2.8)];
/// Additive noise standard deviation for the sine task. Deliberately heavy:
/// single nearest-neighbour decisions degrade under it while averaged
/// feature representations stay stable.
const SINE_NOISE: f64 = 0.9;
/// Set size range for the two-cluster task.
const CLUSTER_SIZE: (usize, usize) = (5, 10);
/// Element dimension for the two-cluster task.
const CLUSTER_DIM: usize = 3;
/// Cluster centers sit at +/- this offset along the first axis.
const CLUSTER_OFFSET: f64 = 0.8;
/// Element scatter around each cluster center.
const CLUSTER_STD: f64 = 0.6;

/// The built-in synthetic tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticTask {
    /// Strings over a 6-symbol alphabet; class 1 contains a fixed 3-symbol
    /// motif, class 0 provably does not.
    MotifString,
    /// Univariate sine series; the class decides the frequency band, with
    /// random phase and length.
    ShiftedSine,
    /// Vector sets in 3-d; the class decides which of two cluster centers
    /// the elements scatter around.
    TwoClusterSets,
}

impl SyntheticTask {
    pub fn tag(self) -> &'static str {
        match self {
            SyntheticTask::MotifString => "motif-string",
            SyntheticTask::ShiftedSine => "shifted-sine",
            SyntheticTask::TwoClusterSets => "two-cluster-sets",
        }
    }
}

impl std::fmt::Display for SyntheticTask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for SyntheticTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "motif-string" => Ok(SyntheticTask::MotifString),
            "shifted-sine" => Ok(SyntheticTask::ShiftedSine),
            "two-cluster-sets" => Ok(SyntheticTask::TwoClusterSets),
            other => Err(Error::Config(format!(
                "unknown synthetic task `{other}` (expected motif-string, shifted-sine, or two-cluster-sets)"
            ))),
        }
    }
}

/// Generate `n` labeled objects for `task` under `seed`.
///
/// Labels alternate 0, 1, 0, 1, ... so classes are balanced (within one for
/// odd `n`). Task parameters are recorded in the dataset notes.
pub fn gen_synthetic(task: SyntheticTask, n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "synthetic datasets need at least 4 objects, got {n}"
        )));
    }
    let mut objects: Vec<StructuredObject> = Vec::with_capacity(n);
    let mut labels: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2;
        let mut rng = stream_rng(seed, STREAM_SYNTH, i as u64);
        let obj = match task {
            SyntheticTask::MotifString => gen_motif_string(label, &mut rng)?,
            SyntheticTask::ShiftedSine => gen_shifted_sine(label, &mut rng)?,
            SyntheticTask::TwoClusterSets => gen_cluster_set(label, &mut rng)?,
        };
        objects.push(obj);
        labels.push(label);
    }
    let mut ds = Dataset::from_class_indices(
        objects,
        labels,
        format!("synthetic:{}(n={n}, seed={seed})", task.tag()),
    )?;
    let notes = &mut ds.meta_mut().notes;
    notes.insert("task".into(), task.tag().into());
    notes.insert("seed".into(), seed.to_string());
    match task {
        SyntheticTask::MotifString => {
            notes.insert("alphabet_size".into(), MOTIF_ALPHABET.to_string());
            notes.insert("motif".into(), format!("{MOTIF:?}"));
            notes.insert("length_range".into(), format!("{MOTIF_LEN:?}"));
        }
        SyntheticTask::ShiftedSine => {
            notes.insert("length_range".into(), format!("{SINE_LEN:?}"));
            notes.insert("frequency_bands".into(), format!("{SINE_BANDS:?}"));
            notes.insert("noise_std".into(), SINE_NOISE.to_string());
        }
        SyntheticTask::TwoClusterSets => {
            notes.insert("dim".into(), CLUSTER_DIM.to_string());
            notes.insert("size_range".into(), format!("{CLUSTER_SIZE:?}"));
            notes.insert("center_offset".into(), CLUSTER_OFFSET.to_string());
            notes.insert("element_std".into(), CLUSTER_STD.to_string());
        }
    }
    Ok(ds)
}

/// True if `haystack` contains `needle` as a contiguous substring.
pub(crate) fn contains_motif(haystack: &[u32], needle: &[u32]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn gen_motif_string(label: usize, rng: &mut impl Rng) -> Result<StructuredObject> {
    let len = rng.random_range(MOTIF_LEN.0..=MOTIF_LEN.1);
    let symbols = if label == 1 {
        // Random background with the motif spliced in at a random position.
        let mut s: Vec<u32> = (0..len - MOTIF.len())
            .map(|_| rng.random_range(0..MOTIF_ALPHABET))
            .collect();
        let at = rng.random_range(0..=s.len());
        s.splice(at..at, MOTIF);
        s
    } else {
        // Rejection-sample a motif-free string; a chance occurrence is rare
        // at these lengths, so this terminates quickly.
        loop {
            let s: Vec<u32> = (0..len).map(|_| rng.random_range(0..MOTIF_ALPHABET)).collect();
            if !contains_motif(&s, &MOTIF) {
                break s;
            }
        }
    };
    Ok(SymbolString::new(symbols, MOTIF_ALPHABET)?.into())
}

fn gen_shifted_sine(label: usize, rng: &mut impl Rng) -> Result<StructuredObject> {
    let len = rng.random_range(SINE_LEN.0..=SINE_LEN.1);
    let (f_lo, f_hi) = SINE_BANDS[label];
    let freq = rng.random_range(f_lo..f_hi);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let noise = Normal::new(0.0, SINE_NOISE).unwrap();
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|t| {
            let x = (std::f64::consts::TAU * freq * t as f64 / 16.0 + phase).sin();
            vec![x + noise.sample(rng)]
        })
        .collect();
    Ok(TimeSeries::from_rows(rows)?.into())
}

fn gen_cluster_set(label: usize, rng: &mut impl Rng) -> Result<StructuredObject> {
    let size = rng.random_range(CLUSTER_SIZE.0..=CLUSTER_SIZE.1);
    let center = if label == 1 { CLUSTER_OFFSET } else { -CLUSTER_OFFSET };
    let noise = Normal::new(0.0, CLUSTER_STD).unwrap();
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|_| {
            (0..CLUSTER_DIM)
                .map(|d| if d == 0 { center } else { 0.0 } + noise.sample(rng))
                .collect()
        })
        .collect();
    Ok(VectorSet::from_rows(rows)?.into())
}
