//! Dynamic time warping.

use crate::error::{Error, Result};
use crate::objects::TimeSeries;

use super::euclidean;

/// DTW distance between two multivariate series with Euclidean local costs.
///
/// Alignments may stretch either series arbitrarily (no warping window) and
/// the total cost is not length-normalized: the result is the minimum over
/// monotone alignment paths of the sum of Euclidean distances between aligned
/// steps. Runs in `O(len_a * len_b)` time and `O(min_len)` space.
///
/// Both series must share the same variable count.
pub fn dtw(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.n_variables() != b.n_variables() {
        return Err(Error::DimensionMismatch(format!(
            "dtw operands have {} and {} variables",
            a.n_variables(),
            b.n_variables()
        )));
    }
    // Keep the shorter series along the inner dimension to shrink the rows.
    let (outer, inner) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let n = inner.len();

    let mut prev = vec![f64::INFINITY; n + 1];
    let mut curr = vec![f64::INFINITY; n + 1];
    prev[0] = 0.0;
    for i in 1..=outer.len() {
        curr[0] = f64::INFINITY;
        let oi = outer.values().row(i - 1);
        let oi = oi.as_slice().expect("row of a standard-layout array");
        for j in 1..=n {
            let ij = inner.values().row(j - 1);
            let ij = ij.as_slice().expect("row of a standard-layout array");
            let cost = euclidean(oi, ij);
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::objects::TimeSeries;

    fn ts1(vals: &[f64]) -> TimeSeries {
        TimeSeries::from_rows(vals.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn identical_series_have_zero_distance() {
        let a = ts1(&[1.0, 2.0, 3.0]);
        assert_eq!(dtw(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn repeated_step_aligns_for_free() {
        // [1,2,3] vs [1,2,2,3]: the duplicated 2 aligns to the same step.
        let a = ts1(&[1.0, 2.0, 3.0]);
        let b = ts1(&[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(dtw(&a, &b).unwrap(), 0.0);
        assert_eq!(dtw(&b, &a).unwrap(), 0.0);
    }

    #[test]
    fn single_step_series_sum_costs() {
        // [0] vs [3,4]: the lone step aligns to both, cost 3 + 4.
        let a = ts1(&[0.0]);
        let b = ts1(&[3.0, 4.0]);
        assert_relative_eq!(dtw(&a, &b).unwrap(), 7.0);
    }

    #[test]
    fn multivariate_uses_euclidean_local_cost() {
        let a = TimeSeries::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        let b = TimeSeries::from_rows(vec![vec![3.0, 4.0]]).unwrap();
        assert_relative_eq!(dtw(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn variable_count_mismatch_is_an_error() {
        let a = TimeSeries::from_rows(vec![vec![0.0, 0.0]]).unwrap();
        let b = TimeSeries::from_rows(vec![vec![0.0]]).unwrap();
        assert!(matches!(dtw(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn triangle_inequality_fails_on_expansion_witness() {
        // d(a,b) = 1 and d(b,c) = 0, but d(a,c) = 2.
        let a = ts1(&[0.0]);
        let b = ts1(&[1.0, 0.0]);
        let c = ts1(&[1.0, 1.0, 0.0]);
        let ab = dtw(&a, &b).unwrap();
        let bc = dtw(&b, &c).unwrap();
        let ac = dtw(&a, &c).unwrap();
        assert_relative_eq!(ab, 1.0);
        assert_relative_eq!(bc, 0.0);
        assert_relative_eq!(ac, 2.0);
        assert!(ac > ab + bc);
    }

    #[test]
    fn identity_fails_on_distinct_series() {
        // Distinct series at distance zero: identity of indiscernibles fails.
        let b = ts1(&[1.0, 0.0]);
        let c = ts1(&[1.0, 1.0, 0.0]);
        assert_eq!(dtw(&b, &c).unwrap(), 0.0);
    }
}
