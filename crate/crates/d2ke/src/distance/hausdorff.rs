//! Modified Hausdorff distance between vector sets.

use crate::error::{Error, Result};
use crate::objects::VectorSet;

use super::euclidean;

/// Ground distance between set elements.
///
/// Only the Euclidean ground distance is supported; the enum exists so the
/// signature states the choice explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ground {
    Euclidean,
}

/// Modified Hausdorff distance.
///
/// Each directed term averages, over the elements of one set, the ground
/// distance to the nearest element of the other set; the result is the larger
/// of the two directed terms:
///
/// ```text
/// d(A, B) = max( mean_{a in A} min_{b in B} |a - b|,
///                mean_{b in B} min_{a in A} |a - b| )
/// ```
///
/// Averaging makes the measure robust to outlier elements but costs it the
/// triangle inequality and identity of indiscernibles.
pub fn mod_hausdorff(a: &VectorSet, b: &VectorSet, ground: Ground) -> Result<f64> {
    let Ground::Euclidean = ground;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector sets have element dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(directed_mean(a, b).max(directed_mean(b, a)))
}

/// Mean over `from` of the minimum Euclidean distance into `to`.
fn directed_mean(from: &VectorSet, to: &VectorSet) -> f64 {
    let mut total = 0.0;
    for x in from.elements().rows() {
        let x = x.as_slice().expect("row of a standard-layout array");
        let mut best = f64::INFINITY;
        for y in to.elements().rows() {
            let y = y.as_slice().expect("row of a standard-layout array");
            let d = euclidean(x, y);
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / from.len() as f64
}
