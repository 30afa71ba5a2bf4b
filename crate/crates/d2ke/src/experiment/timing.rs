//! Wall-clock scaling measurements for the embedding step.
//!
//! The feature map costs one distance evaluation per (object, landmark)
//! pair, so time should grow linearly in the object count and in the
//! landmark count. The report times both sweeps on synthetic inputs of
//! fixed per-object size and fits a log-log slope to each.

use std::hint::black_box;
use std::time::Instant;

use crate::distance::Measure;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::objects::ObjectKind;
use crate::sampling::{sample_omegas, OmegaDistribution, OmegaSample};
use crate::seeding::{derive_seed, STREAM_TIMING};

/// Timing repetitions per point; the median is reported.
const REPS: usize = 3;

/// One measured sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    /// The swept size (object count or landmark count).
    pub x: usize,
    /// Median wall-clock seconds over the repetitions.
    pub seconds: f64,
}

/// Measured sweeps plus fitted slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub measure: Measure,
    /// Object-count sweep at fixed landmark count.
    pub n_points: Vec<ScalingPoint>,
    /// Landmark-count sweep at fixed object count.
    pub r_points: Vec<ScalingPoint>,
    /// Landmark count held while sweeping objects.
    pub r_fixed: usize,
    /// Object count held while sweeping landmarks.
    pub n_fixed: usize,
    /// Log-log slope of seconds vs object count; NaN when degenerate.
    pub n_slope: f64,
    /// Log-log slope of seconds vs landmark count; NaN when degenerate.
    pub r_slope: f64,
    /// True when a timing hit clock resolution, making slopes unusable.
    pub degenerate: bool,
}

impl ScalingReport {
    /// Plain-text rendering for terminal output.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("embedding scaling, measure {}\n", self.measure));
        out.push_str(&format!("objects sweep (landmarks = {}):\n", self.r_fixed));
        for p in &self.n_points {
            out.push_str(&format!("  n = {:>8}  {:.6} s\n", p.x, p.seconds));
        }
        out.push_str(&format!("landmarks sweep (objects = {}):\n", self.n_fixed));
        for p in &self.r_points {
            out.push_str(&format!("  r = {:>8}  {:.6} s\n", p.x, p.seconds));
        }
        out.push_str(&format!(
            "log-log slopes: objects {:.3}, landmarks {:.3}\n",
            self.n_slope, self.r_slope
        ));
        if self.degenerate {
            out.push_str("warning: a timing fell below clock resolution; slopes are unreliable\n");
        }
        out
    }
}

/// Inputs of constant per-object size, so per-pair cost does not drift
/// across the sweep.
fn timing_distribution(kind: ObjectKind) -> OmegaDistribution {
    match kind {
        ObjectKind::TimeSeries => OmegaDistribution::RandomTimeSeries {
            length_min: 16,
            length_max: 16,
            n_variables: 1,
            element_std: 1.0,
        },
        ObjectKind::String => OmegaDistribution::RandomString {
            length_min: 16,
            length_max: 16,
            alphabet_size: 4,
        },
        ObjectKind::VectorSet => OmegaDistribution::RandomVectorSet {
            size_min: 8,
            size_max: 8,
            dim: 3,
        },
    }
}

fn check_sweep(name: &str, list: &[usize]) -> Result<()> {
    if list.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{name} sweep needs at least 2 sizes, got {}",
            list.len()
        )));
    }
    for w in list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(format!(
                "{name} sweep must be strictly increasing, got {w:?}"
            )));
        }
    }
    if list[0] == 0 {
        return Err(Error::InvalidArgument(format!("{name} sweep sizes must be positive")));
    }
    Ok(())
}

/// Median of `REPS` timed embeddings of `objects` against `omegas`.
fn time_embedding(
    objects: &[crate::objects::StructuredObject],
    omegas: &OmegaSample,
    measure: Measure,
) -> Result<f64> {
    let model = EmbeddingModel::new(omegas.clone(), 1.0, measure)?;
    // Warm-up pass; also feeds a sink so the work cannot be elided.
    let mut sink = black_box(model.embed_objects(objects)?.sum());
    let mut times = [0.0f64; REPS];
    for t in times.iter_mut() {
        let start = Instant::now();
        let features = model.embed_objects(objects)?;
        *t = start.elapsed().as_secs_f64();
        sink += black_box(features.sum());
    }
    black_box(sink);
    times.sort_by(|a, b| a.total_cmp(b));
    Ok(times[REPS / 2])
}

/// Least-squares slope of ln(seconds) against ln(x). Returns NaN when any
/// timing is non-positive.
fn log_log_slope(points: &[ScalingPoint]) -> f64 {
    if points.iter().any(|p| p.seconds <= 0.0) {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in points {
        let x = (p.x as f64).ln();
        let y = p.seconds.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Time the embedding over an object-count sweep and a landmark-count
/// sweep, and fit log-log slopes.
///
/// The object sweep holds the landmark count at `r_list[0]`; the landmark
/// sweep holds the object count at `n_list[0]`. Both lists must be strictly
/// increasing with at least two entries.
pub fn timing_scaling_report(
    measure: Measure,
    n_list: &[usize],
    r_list: &[usize],
    seed: u64,
) -> Result<ScalingReport> {
    check_sweep("object", n_list)?;
    check_sweep("landmark", r_list)?;
    let dist = timing_distribution(measure.object_kind());
    let n_max = *n_list.last().unwrap();
    let r_max = *r_list.last().unwrap();
    let data = sample_omegas(&dist, n_max, derive_seed(seed, STREAM_TIMING, 0))?;
    let omegas = sample_omegas(&dist, r_max, derive_seed(seed, STREAM_TIMING, 1))?;

    let r_fixed = r_list[0];
    let omegas_fixed = omegas.prefix(r_fixed)?;
    let mut n_points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let seconds = time_embedding(&data.objects()[..n], &omegas_fixed, measure)?;
        n_points.push(ScalingPoint { x: n, seconds });
    }

    let n_fixed = n_list[0];
    let fixed_objects = &data.objects()[..n_fixed];
    let mut r_points = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let seconds = time_embedding(fixed_objects, &omegas.prefix(r)?, measure)?;
        r_points.push(ScalingPoint { x: r, seconds });
    }

    let n_slope = log_log_slope(&n_points);
    let r_slope = log_log_slope(&r_points);
    let degenerate = !n_slope.is_finite() || !r_slope.is_finite();
    Ok(ScalingReport {
        measure,
        n_points,
        r_points,
        r_fixed,
        n_fixed,
        n_slope,
        r_slope,
        degenerate,
    })
}
