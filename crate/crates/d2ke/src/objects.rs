//! Structured object types: time series, symbol strings, vector sets.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discriminates the three structured-object domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    TimeSeries,
    String,
    VectorSet,
}

impl ObjectKind {
    /// Stable tag used in CLI arguments and file metadata.
    pub fn tag(self) -> &'static str {
        match self {
            ObjectKind::TimeSeries => "time-series",
            ObjectKind::String => "string",
            ObjectKind::VectorSet => "vector-set",
        }
    }
}

impl std::fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for ObjectKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time-series" => Ok(ObjectKind::TimeSeries),
            "string" => Ok(ObjectKind::String),
            "vector-set" => Ok(ObjectKind::VectorSet),
            other => Err(Error::Config(format!(
                "unknown object kind `{other}` (expected time-series, string, or vector-set)"
            ))),
        }
    }
}

/// A multivariate time series: `T` time steps of `V` variables, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Array2<f64>,
}

impl TimeSeries {
    /// Build from a `T x V` array. Requires `T >= 1`, `V >= 1`, finite values.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (t, v) = values.dim();
        if t == 0 || v == 0 {
            return Err(Error::InvalidArgument(format!(
                "time series must have at least one step and one variable, got {t}x{v}"
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "time series values must be finite".into(),
            ));
        }
        Ok(TimeSeries { values })
    }

    /// Build from row-major step data; all rows must share one length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "time series must have at least one step".into(),
            ));
        }
        let v = rows[0].len();
        if rows.iter().any(|r| r.len() != v) {
            return Err(Error::DimensionMismatch(
                "time series rows have differing variable counts".into(),
            ));
        }
        let t = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((t, v), flat)
            .expect("row-major shape matches collected length");
        TimeSeries::new(values)
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of variables per step.
    pub fn n_variables(&self) -> usize {
        self.values.ncols()
    }

    /// The underlying `T x V` array.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// A string over a finite alphabet; symbols are indices below `alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolString {
    symbols: Vec<u32>,
    alphabet_size: u32,
}

impl SymbolString {
    /// Build from symbol indices. The empty string is allowed; every symbol
    /// must lie below `alphabet_size`.
    pub fn new(symbols: Vec<u32>, alphabet_size: u32) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::InvalidArgument(
                "alphabet size must be at least 1".into(),
            ));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::InvalidArgument(format!(
                "symbol {s} out of range for alphabet size {alphabet_size}"
            )));
        }
        Ok(SymbolString { symbols, alphabet_size })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// A non-empty multiset of vectors in `R^p`, stored as an `m x p` array.
///
/// Order of elements carries no meaning for the distances defined on sets,
/// but it is preserved so that serialization round-trips exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSet {
    elements: Array2<f64>,
}

impl VectorSet {
    /// Build from an `m x p` array. Requires `m >= 1`, `p >= 1`, finite values.
    pub fn new(elements: Array2<f64>) -> Result<Self> {
        let (m, p) = elements.dim();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "vector set must contain at least one element".into(),
            ));
        }
        if p == 0 {
            return Err(Error::InvalidArgument(
                "vector set elements must have dimension at least 1".into(),
            ));
        }
        if elements.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "vector set elements must be finite".into(),
            ));
        }
        Ok(VectorSet { elements })
    }

    /// Build from element rows; all rows must share one dimension.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument(
                "vector set must contain at least one element".into(),
            ));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch(
                "vector set elements have differing dimensions".into(),
            ));
        }
        let m = rows.len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let elements = Array2::from_shape_vec((m, p), flat)
            .expect("row-major shape matches collected length");
        VectorSet::new(elements)
    }

    /// Number of elements in the set.
    pub fn len(&self) -> usize {
        self.elements.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of each element.
    pub fn dim(&self) -> usize {
        self.elements.ncols()
    }

    /// The underlying `m x p` array.
    pub fn elements(&self) -> &Array2<f64> {
        &self.elements
    }
}

/// Tagged union over the three object domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StructuredObject {
    TimeSeries(TimeSeries),
    String(SymbolString),
    VectorSet(VectorSet),
}

impl StructuredObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            StructuredObject::TimeSeries(_) => ObjectKind::TimeSeries,
            StructuredObject::String(_) => ObjectKind::String,
            StructuredObject::VectorSet(_) => ObjectKind::VectorSet,
        }
    }

    pub fn as_time_series(&self) -> Result<&TimeSeries> {
        match self {
            StructuredObject::TimeSeries(t) => Ok(t),
            other => Err(Error::KindMismatch {
                expected: ObjectKind::TimeSeries,
                got: other.kind(),
            }),
        }
    }

    pub fn as_string(&self) -> Result<&SymbolString> {
        match self {
            StructuredObject::String(s) => Ok(s),
            other => Err(Error::KindMismatch {
                expected: ObjectKind::String,
                got: other.kind(),
            }),
        }
    }

    pub fn as_vector_set(&self) -> Result<&VectorSet> {
        match self {
            StructuredObject::VectorSet(v) => Ok(v),
            other => Err(Error::KindMismatch {
                expected: ObjectKind::VectorSet,
                got: other.kind(),
            }),
        }
    }

    /// A short size descriptor (steps, symbols, or elements) for messages.
    pub fn size(&self) -> usize {
        match self {
            StructuredObject::TimeSeries(t) => t.len(),
            StructuredObject::String(s) => s.len(),
            StructuredObject::VectorSet(v) => v.len(),
        }
    }
}

impl From<TimeSeries> for StructuredObject {
    fn from(t: TimeSeries) -> Self {
        StructuredObject::TimeSeries(t)
    }
}

impl From<SymbolString> for StructuredObject {
    fn from(s: SymbolString) -> Self {
        StructuredObject::String(s)
    }
}

impl From<VectorSet> for StructuredObject {
    fn from(v: VectorSet) -> Self {
        StructuredObject::VectorSet(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn time_series_rejects_empty_and_nonfinite() {
        assert!(TimeSeries::new(Array2::zeros((0, 3))).is_err());
        assert!(TimeSeries::new(Array2::zeros((3, 0))).is_err());
        assert!(TimeSeries::new(array![[f64::NAN]]).is_err());
        assert!(TimeSeries::new(array![[1.0, 2.0]]).is_ok());
    }

    #[test]
    fn time_series_from_rows_checks_widths() {
        let err = TimeSeries::from_rows(vec![vec![1.0, 2.0], vec![3.0]]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let ts = TimeSeries::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(ts.len(), 2);
        assert_eq!(ts.n_variables(), 2);
    }

    #[test]
    fn symbol_string_allows_empty_rejects_out_of_range() {
        let s = SymbolString::new(vec![], 4).unwrap();
        assert!(s.is_empty());
        assert!(SymbolString::new(vec![0, 3], 4).is_ok());
        assert!(SymbolString::new(vec![4], 4).is_err());
        assert!(SymbolString::new(vec![], 0).is_err());
    }

    #[test]
    fn vector_set_rejects_empty() {
        assert!(VectorSet::from_rows(vec![]).is_err());
        assert!(VectorSet::new(Array2::zeros((0, 2))).is_err());
        let v = VectorSet::from_rows(vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.dim(), 2);
    }

    #[test]
    fn kind_accessors_enforce_kind() {
        let obj: StructuredObject = SymbolString::new(vec![0], 2).unwrap().into();
        assert_eq!(obj.kind(), ObjectKind::String);
        assert!(obj.as_string().is_ok());
        let err = obj.as_time_series().unwrap_err();
        assert!(matches!(err, Error::KindMismatch { .. }));
    }

    #[test]
    fn object_serde_round_trip() {
        let obj: StructuredObject =
            TimeSeries::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap().into();
        let json = serde_json::to_string(&obj).unwrap();
        let back: StructuredObject = serde_json::from_str(&json).unwrap();
        assert_eq!(obj, back);
    }

    #[test]
    fn kind_tags_round_trip() {
        for kind in [ObjectKind::TimeSeries, ObjectKind::String, ObjectKind::VectorSet] {
            let parsed: ObjectKind = kind.tag().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("graph".parse::<ObjectKind>().is_err());
    }
}
