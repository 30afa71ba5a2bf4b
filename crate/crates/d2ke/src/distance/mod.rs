//! Dissimilarity measures over structured objects.
//!
//! Each measure applies to exactly one object kind and states which metric
//! axioms it satisfies. None of the pipeline code assumes the triangle
//! inequality or identity of indiscernibles; the axiom record exists so
//! callers (and tests) know what they may rely on.

mod dtw;
mod edit;
mod hausdorff;
pub mod oracle;

pub use dtw::dtw;
pub use edit::{edit_distance, levenshtein};
pub use hausdorff::{mod_hausdorff, Ground};
pub use oracle::oracle_distance;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objects::{ObjectKind, StructuredObject};

/// Which of the four metric axioms a measure satisfies on its full domain.
///
/// The axioms: (i) non-negativity, (ii) identity of indiscernibles
/// (`d(x, y) = 0` iff `x = y`), (iii) symmetry, (iv) triangle inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricAxioms {
    pub non_negative: bool,
    pub identity: bool,
    pub symmetric: bool,
    pub triangle: bool,
}

/// The dissimilarity measures shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Dynamic time warping with Euclidean local costs (time series).
    Dtw,
    /// Levenshtein edit distance with unit costs (strings).
    Edit,
    /// Modified Hausdorff distance with Euclidean ground distance (vector sets).
    ModHausdorff,
}

impl Measure {
    /// Stable tag used in CLI arguments, configs, and result tables.
    pub fn tag(self) -> &'static str {
        match self {
            Measure::Dtw => "dtw",
            Measure::Edit => "edit",
            Measure::ModHausdorff => "mod-hausdorff",
        }
    }

    /// The object kind this measure accepts.
    pub fn object_kind(self) -> ObjectKind {
        match self {
            Measure::Dtw => ObjectKind::TimeSeries,
            Measure::Edit => ObjectKind::String,
            Measure::ModHausdorff => ObjectKind::VectorSet,
        }
    }

    /// The default measure for an object kind.
    pub fn default_for(kind: ObjectKind) -> Measure {
        match kind {
            ObjectKind::TimeSeries => Measure::Dtw,
            ObjectKind::String => Measure::Edit,
            ObjectKind::VectorSet => Measure::ModHausdorff,
        }
    }

    /// Axioms guaranteed on the whole domain.
    ///
    /// DTW violates identity (a run-length expansion of a series has DTW
    /// distance zero from it) and the triangle inequality. The modified
    /// Hausdorff distance violates identity (sets with duplicated elements)
    /// and the triangle inequality. Edit distance is a metric.
    pub fn axioms(self) -> MetricAxioms {
        match self {
            Measure::Dtw => MetricAxioms {
                non_negative: true,
                identity: false,
                symmetric: true,
                triangle: false,
            },
            Measure::Edit => MetricAxioms {
                non_negative: true,
                identity: true,
                symmetric: true,
                triangle: true,
            },
            Measure::ModHausdorff => MetricAxioms {
                non_negative: true,
                identity: false,
                symmetric: true,
                triangle: false,
            },
        }
    }

    /// Evaluate the measure on two objects of its kind.
    pub fn evaluate(self, a: &StructuredObject, b: &StructuredObject) -> Result<f64> {
        match self {
            Measure::Dtw => dtw(a.as_time_series()?, b.as_time_series()?),
            Measure::Edit => edit_distance(a.as_string()?, b.as_string()?).map(|d| d as f64),
            Measure::ModHausdorff => {
                mod_hausdorff(a.as_vector_set()?, b.as_vector_set()?, Ground::Euclidean)
            }
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtw" => Ok(Measure::Dtw),
            "edit" => Ok(Measure::Edit),
            "mod-hausdorff" => Ok(Measure::ModHausdorff),
            other => Err(Error::Config(format!(
                "unknown measure `{other}` (expected dtw, edit, or mod-hausdorff)"
            ))),
        }
    }
}

/// Dense distance matrix between two object lists.
///
/// Entry `(i, j)` is `d(a[i], b[j])`. Rows run in parallel; element order
/// within each row is fixed, so results do not depend on thread count.
/// Failures report the offending row index.
pub fn pairwise_distances(
    a: &[StructuredObject],
    b: &[StructuredObject],
    measure: Measure,
) -> Result<ndarray::Array2<f64>> {
    use rayon::prelude::*;
    let rows: Vec<Vec<f64>> = a
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            b.iter()
                .map(|y| measure.evaluate(x, y))
                .collect::<Result<Vec<f64>>>()
                .map_err(|e| with_row_index(e, i))
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    ndarray::Array2::from_shape_vec((a.len(), b.len()), flat)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))
}

fn with_row_index(e: Error, i: usize) -> Error {
    match e {
        Error::DimensionMismatch(m) => Error::DimensionMismatch(format!("object {i}: {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("object {i}: {m}")),
        Error::KindMismatch { expected, got } => Error::InvalidArgument(format!(
            "object {i}: kind mismatch: expected {expected}, got {got}"
        )),
        other => other,
    }
}

/// Euclidean distance between two equal-length coordinate slices.
#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::{SymbolString, TimeSeries};

    #[test]
    fn evaluate_rejects_wrong_kind() {
        let s: StructuredObject = SymbolString::new(vec![0], 2).unwrap().into();
        let t: StructuredObject = TimeSeries::from_rows(vec![vec![0.0]]).unwrap().into();
        assert!(Measure::Dtw.evaluate(&s, &s).is_err());
        assert!(Measure::Edit.evaluate(&t, &t).is_err());
        assert!(Measure::ModHausdorff.evaluate(&s, &t).is_err());
        assert!(Measure::Edit.evaluate(&s, &s).is_ok());
    }

    #[test]
    fn tags_round_trip() {
        for m in [Measure::Dtw, Measure::Edit, Measure::ModHausdorff] {
            assert_eq!(m.tag().parse::<Measure>().unwrap(), m);
        }
        assert!("cosine".parse::<Measure>().is_err());
    }

    #[test]
    fn axiom_claims() {
        assert!(Measure::Edit.axioms().triangle);
        assert!(Measure::Edit.axioms().identity);
        for m in [Measure::Dtw, Measure::ModHausdorff] {
            let ax = m.axioms();
            assert!(ax.non_negative && ax.symmetric);
            assert!(!ax.identity && !ax.triangle);
        }
    }

    #[test]
    fn default_measure_matches_kind() {
        for kind in [ObjectKind::TimeSeries, ObjectKind::String, ObjectKind::VectorSet] {
            assert_eq!(Measure::default_for(kind).object_kind(), kind);
        }
    }

    #[test]
    fn pairwise_matrix_matches_scalar_calls() {
        let objs: Vec<StructuredObject> = [&[0u32, 1][..], &[1, 1, 0], &[0]]
            .iter()
            .map(|s| SymbolString::new(s.to_vec(), 2).unwrap().into())
            .collect();
        let m = pairwise_distances(&objs, &objs, Measure::Edit).unwrap();
        assert_eq!(m.dim(), (3, 3));
        for i in 0..3 {
            assert_eq!(m[(i, i)], 0.0);
            for j in 0..3 {
                assert_eq!(m[(i, j)], Measure::Edit.evaluate(&objs[i], &objs[j]).unwrap());
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        let t: Vec<StructuredObject> =
            vec![TimeSeries::from_rows(vec![vec![0.0]]).unwrap().into()];
        assert!(pairwise_distances(&objs, &t, Measure::Edit).is_err());
    }
}
