//! Brute-force reference implementations for small inputs.
//!
//! These oracles recompute each distance by a different route than the
//! production dynamic programs: DTW by enumerating every monotone alignment
//! path, edit distance by iterative deepening over edit scripts, and modified
//! Hausdorff by an independent evaluation of its definition. They exist to
//! cross-check the fast implementations and are deliberately capped to input
//! sizes where exhaustive search stays cheap.

use crate::error::{Error, Result};
use crate::objects::{StructuredObject, SymbolString, TimeSeries, VectorSet};

use super::{euclidean, Measure};

/// Maximum series length accepted by the DTW oracle.
pub const ORACLE_MAX_DTW_LEN: usize = 8;
/// Maximum string length accepted by the edit oracle.
pub const ORACLE_MAX_EDIT_LEN: usize = 6;
/// Maximum set size accepted by the modified Hausdorff oracle.
pub const ORACLE_MAX_SET_LEN: usize = 5;

/// Evaluate `measure` on two small objects by exhaustive search.
///
/// Errors if either object exceeds the oracle's size cap for that measure.
pub fn oracle_distance(
    measure: Measure,
    a: &StructuredObject,
    b: &StructuredObject,
) -> Result<f64> {
    match measure {
        Measure::Dtw => dtw_all_paths(a.as_time_series()?, b.as_time_series()?),
        Measure::Edit => {
            edit_by_deepening(a.as_string()?, b.as_string()?).map(|d| d as f64)
        }
        Measure::ModHausdorff => {
            mod_hausdorff_direct(a.as_vector_set()?, b.as_vector_set()?)
        }
    }
}

/// Minimum alignment cost over every monotone warping path, found by
/// depth-first enumeration from the last aligned pair backwards.
pub fn dtw_all_paths(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.len() > ORACLE_MAX_DTW_LEN || b.len() > ORACLE_MAX_DTW_LEN {
        return Err(Error::InvalidArgument(format!(
            "dtw oracle accepts series up to {ORACLE_MAX_DTW_LEN} steps, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.n_variables() != b.n_variables() {
        return Err(Error::DimensionMismatch(format!(
            "dtw operands have {} and {} variables",
            a.n_variables(),
            b.n_variables()
        )));
    }
    fn cost(a: &TimeSeries, b: &TimeSeries, i: usize, j: usize) -> f64 {
        let x = a.values().row(i);
        let y = b.values().row(j);
        euclidean(x.as_slice().unwrap(), y.as_slice().unwrap())
    }
    // best(i, j): cheapest path aligning prefixes a[..=i], b[..=j] that ends
    // with (i, j) aligned. Plain recursion; sizes are capped so no memo.
    fn best(a: &TimeSeries, b: &TimeSeries, i: usize, j: usize) -> f64 {
        let c = cost(a, b, i, j);
        if i == 0 && j == 0 {
            return c;
        }
        let mut acc = f64::INFINITY;
        if i > 0 {
            acc = acc.min(best(a, b, i - 1, j));
        }
        if j > 0 {
            acc = acc.min(best(a, b, i, j - 1));
        }
        if i > 0 && j > 0 {
            acc = acc.min(best(a, b, i - 1, j - 1));
        }
        c + acc
    }
    Ok(best(a, b, a.len() - 1, b.len() - 1))
}

/// Smallest edit budget for which some edit script transforms `a` into `b`,
/// found by iterative deepening over scripts.
pub fn edit_by_deepening(a: &SymbolString, b: &SymbolString) -> Result<usize> {
    if a.len() > ORACLE_MAX_EDIT_LEN || b.len() > ORACLE_MAX_EDIT_LEN {
        return Err(Error::InvalidArgument(format!(
            "edit oracle accepts strings up to {ORACLE_MAX_EDIT_LEN} symbols, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.alphabet_size() != b.alphabet_size() {
        return Err(Error::DimensionMismatch(format!(
            "edit distance operands have alphabet sizes {} and {}",
            a.alphabet_size(),
            b.alphabet_size()
        )));
    }
    // Can the suffix pair (x, y) be reconciled within `budget` edits?
    fn feasible(x: &[u32], y: &[u32], budget: usize) -> bool {
        if x.is_empty() {
            return y.len() <= budget;
        }
        if y.is_empty() {
            return x.len() <= budget;
        }
        if x[0] == y[0] {
            return feasible(&x[1..], &y[1..], budget);
        }
        if budget == 0 {
            return false;
        }
        feasible(&x[1..], &y[1..], budget - 1) // substitute
            || feasible(&x[1..], y, budget - 1) // delete from x
            || feasible(x, &y[1..], budget - 1) // insert into x
    }
    let (x, y) = (a.symbols(), b.symbols());
    let cap = x.len() + y.len();
    for budget in 0..=cap {
        if feasible(x, y, budget) {
            return Ok(budget);
        }
    }
    unreachable!("budget |a| + |b| always suffices");
}

/// Modified Hausdorff recomputed straight from its definition on a full
/// pairwise ground-distance table.
pub fn mod_hausdorff_direct(a: &VectorSet, b: &VectorSet) -> Result<f64> {
    if a.len() > ORACLE_MAX_SET_LEN || b.len() > ORACLE_MAX_SET_LEN {
        return Err(Error::InvalidArgument(format!(
            "hausdorff oracle accepts sets up to {ORACLE_MAX_SET_LEN} elements, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector sets have element dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let table: Vec<Vec<f64>> = a
        .elements()
        .rows()
        .into_iter()
        .map(|x| {
            b.elements()
                .rows()
                .into_iter()
                .map(|y| euclidean(x.as_slice().unwrap(), y.as_slice().unwrap()))
                .collect()
        })
        .collect();
    let row_min_mean = table
        .iter()
        .map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / a.len() as f64;
    let col_min_mean = (0..b.len())
        .map(|j| table.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / b.len() as f64;
    Ok(row_min_mean.max(col_min_mean))
}
