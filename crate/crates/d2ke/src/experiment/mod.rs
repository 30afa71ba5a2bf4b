//! Config-driven benchmark experiments: parse a flat key=value config,
//! run each requested method through cross-validation, refit, and test
//! evaluation, and emit a result table.

pub mod config;
pub mod runner;
pub mod table;
pub mod timing;

pub use config::{
    load_config, parse_config, DatasetSpec, ExperimentConfig, OmegaFamily, OmegaSettings,
};
pub use runner::{
    fit_d2ke, prepare_data, resolve_distribution, run_experiment, D2keFit, PreparedData,
    Standardization,
};
pub use table::{OutputFormat, ResultRow, ResultTable, TableMeta};
pub use timing::{timing_scaling_report, ScalingPoint, ScalingReport};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The classification methods the runner can benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Random feature embedding of the measure plus a linear model.
    D2ke,
    /// k-nearest neighbours on raw distances.
    Knn,
    /// Kernel ridge on `exp(-gamma * d^2)` distance substitution.
    DskRbf,
    /// Kernel ridge on `-d^2` distance substitution.
    DskNd,
    /// Linear model on a pseudo-Euclidean embedding of the distance matrix.
    GdkLed,
    /// Representative-set features: landmark embedding with landmarks drawn
    /// from the training split.
    Rsm,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::D2ke => "d2ke",
            Method::Knn => "knn",
            Method::DskRbf => "dsk-rbf",
            Method::DskNd => "dsk-nd",
            Method::GdkLed => "gdk-led",
            Method::Rsm => "rsm",
        }
    }

    pub const ALL: [Method; 6] = [
        Method::D2ke,
        Method::Knn,
        Method::DskRbf,
        Method::DskNd,
        Method::GdkLed,
        Method::Rsm,
    ];
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .iter()
            .find(|m| m.tag() == s)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}` (expected one of d2ke, knn, dsk-rbf, dsk-nd, gdk-led, rsm)"
                ))
            })
    }
}
