//! Experiment configuration: a flat `key = value` text format.
//!
//! Only documented keys are accepted; an unknown or duplicated key is a
//! config error, so grid typos fail loudly instead of silently running with
//! defaults. Lists are comma-separated. Lines starting with `#` and blank
//! lines are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::distance::Measure;
use crate::error::{Error, Result};
use crate::experiment::table::OutputFormat;
use crate::experiment::Method;
use crate::gram::EigenTreatment;
use crate::io::FileFormat;
use crate::learn::Loss;
use crate::synthetic::SyntheticTask;

/// Where the experiment data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// A built-in generated task, split into fresh train and test sets.
    Synthetic {
        task: SyntheticTask,
        n_train: usize,
        n_test: usize,
    },
    /// A dataset file, split by fraction under the run seed.
    File {
        path: PathBuf,
        /// None means infer from the file name suffix.
        format: Option<FileFormat>,
        train_fraction: f64,
    },
}

/// How landmark objects are drawn for the d2ke feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaFamily {
    /// Synthetic objects from a random distribution matched to the data kind.
    Random,
    /// Training objects themselves (the representative-set variant).
    Holdout,
}

impl OmegaFamily {
    pub fn tag(self) -> &'static str {
        match self {
            OmegaFamily::Random => "random",
            OmegaFamily::Holdout => "holdout",
        }
    }
}

impl std::str::FromStr for OmegaFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(OmegaFamily::Random),
            "holdout" => Ok(OmegaFamily::Holdout),
            other => Err(Error::Config(format!(
                "unknown omega family `{other}` (expected random or holdout)"
            ))),
        }
    }
}

/// Landmark-distribution knobs. Range fields left as None are resolved from
/// training-set statistics when the experiment runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSettings {
    pub family: OmegaFamily,
    /// Length range for random time series and strings.
    pub length_min: Option<usize>,
    pub length_max: Option<usize>,
    /// Element-count range for random vector sets.
    pub size_min: Option<usize>,
    pub size_max: Option<usize>,
    /// Alphabet size for random strings; None means infer from the data.
    pub alphabet_size: Option<u32>,
    /// Element scale for random time series; None means 1.0.
    pub element_std: Option<f64>,
    /// Whether holdout draws avoid repeats.
    pub without_replacement: bool,
}

impl Default for OmegaSettings {
    fn default() -> Self {
        OmegaSettings {
            family: OmegaFamily::Random,
            length_min: None,
            length_max: None,
            size_min: None,
            size_max: None,
            alphabet_size: None,
            element_std: None,
            without_replacement: true,
        }
    }
}

/// A fully parsed experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// None means the default measure for the data kind.
    pub measure: Option<Measure>,
    pub methods: Vec<Method>,
    /// Master seeds; one result row per method per seed.
    pub seeds: Vec<u64>,
    pub folds: usize,
    pub loss: Loss,
    pub tol: f64,
    pub max_iter: usize,
    pub gamma_grid: Vec<f64>,
    pub r_grid: Vec<usize>,
    pub mu_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub led_dim_grid: Vec<usize>,
    pub led_eigen: EigenTreatment,
    /// Embed train and test jointly before fitting (off by default).
    pub led_transductive: bool,
    pub omega: OmegaSettings,
    /// Standardize time-series variables using training statistics.
    pub standardize: bool,
    pub output: Option<PathBuf>,
    pub output_format: OutputFormat,
}

/// Grid defaults: log-spaced decades for the continuous knobs, powers of two
/// for the dimension knobs.
pub fn default_gamma_grid() -> Vec<f64> {
    vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0]
}

pub fn default_r_grid() -> Vec<usize> {
    vec![4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]
}

pub fn default_reg_grid() -> Vec<f64> {
    vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0]
}

pub fn default_k_grid() -> Vec<usize> {
    vec![1, 3, 5, 7, 9]
}

pub fn default_led_dim_grid() -> Vec<usize> {
    vec![4, 8, 16, 32, 64, 128, 256, 512]
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn with_defaults(dataset: DatasetSpec, seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            dataset,
            measure: None,
            methods: Method::ALL.to_vec(),
            seeds,
            folds: 10,
            loss: Loss::Logistic,
            tol: 1e-8,
            max_iter: 200,
            gamma_grid: default_gamma_grid(),
            r_grid: default_r_grid(),
            mu_grid: default_reg_grid(),
            lambda_grid: default_reg_grid(),
            k_grid: default_k_grid(),
            led_dim_grid: default_led_dim_grid(),
            led_eigen: EigenTreatment::Clip,
            led_transductive: false,
            omega: OmegaSettings::default(),
            standardize: true,
            output: None,
            output_format: OutputFormat::Tsv,
        }
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let entries = parse_entries(text)?;
        build_config(entries)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        ExperimentConfig::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Structural checks that need no dataset: non-empty grids, sane ranges.
    /// Kind-dependent checks (measure vs data kind, holdout pool sizes) run
    /// inside the experiment once the data is loaded.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::Config(format!("method `{m}` listed twice")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            if self.seeds[..i].contains(s) {
                return Err(Error::Config(format!("seed {s} listed twice")));
            }
        }
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        check_positive_grid("gamma_grid", &self.gamma_grid)?;
        check_positive_grid("mu_grid", &self.mu_grid)?;
        check_positive_grid("lambda_grid", &self.lambda_grid)?;
        check_dim_grid("r_grid", &self.r_grid)?;
        check_dim_grid("k_grid", &self.k_grid)?;
        check_dim_grid("led_dim_grid", &self.led_dim_grid)?;
        if let Some(std) = self.omega.element_std {
            if !(std.is_finite() && std > 0.0) {
                return Err(Error::Config(format!(
                    "omega_element_std must be positive, got {std}"
                )));
            }
        }
        check_range("omega_length", self.omega.length_min, self.omega.length_max)?;
        check_range("omega_size", self.omega.size_min, self.omega.size_max)?;
        if let Some(a) = self.omega.alphabet_size {
            if a < 2 {
                return Err(Error::Config(format!(
                    "omega_alphabet_size must be at least 2, got {a}"
                )));
            }
        }
        match &self.dataset {
            DatasetSpec::Synthetic { n_train, n_test, .. } => {
                if *n_train < 4 {
                    return Err(Error::Config(format!(
                        "n_train must be at least 4, got {n_train}"
                    )));
                }
                if *n_test < 1 {
                    return Err(Error::Config("n_test must be at least 1".into()));
                }
            }
            DatasetSpec::File { train_fraction, .. } => {
                if !(train_fraction.is_finite() && *train_fraction > 0.0 && *train_fraction < 1.0)
                {
                    return Err(Error::Config(format!(
                        "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(text)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}

fn check_positive_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    for &v in grid {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!(
                "{name} entries must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_dim_grid(name: &str, grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    if grid.contains(&0) {
        return Err(Error::Config(format!("{name} entries must be at least 1")));
    }
    Ok(())
}

fn check_range(name: &str, lo: Option<usize>, hi: Option<usize>) -> Result<()> {
    if lo == Some(0) || hi == Some(0) {
        return Err(Error::Config(format!("{name} bounds must be at least 1")));
    }
    if let (Some(lo), Some(hi)) = (lo, hi) {
        if lo > hi {
            return Err(Error::Config(format!(
                "{name}_min {lo} exceeds {name}_max {hi}"
            )));
        }
    }
    Ok(())
}

/// Every key the format accepts, for the unknown-key error message.
const KNOWN_KEYS: &[&str] = &[
    "dataset",
    "n_train",
    "n_test",
    "train_fraction",
    "format",
    "measure",
    "methods",
    "seed",
    "seeds",
    "folds",
    "loss",
    "tol",
    "max_iter",
    "gamma_grid",
    "r_grid",
    "mu_grid",
    "lambda_grid",
    "k_grid",
    "led_dim_grid",
    "led_eigen",
    "led_transductive",
    "omega_family",
    "omega_length_min",
    "omega_length_max",
    "omega_size_min",
    "omega_size_max",
    "omega_alphabet_size",
    "omega_element_std",
    "omega_without_replacement",
    "standardize",
    "output",
    "output_format",
];

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key `{key}` (see the config reference for the accepted keys)",
                i + 1
            )));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: key `{key}` has no value", i + 1)));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

fn build_config(mut entries: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let mut take = |key: &str| entries.remove(key);

    let dataset_value = take("dataset")
        .ok_or_else(|| Error::Config("missing required key `dataset`".into()))?;
    let seed = take("seed");
    let seeds = take("seeds");
    let seeds = match (seed, seeds) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either `seed` or `seeds`, not both".into()))
        }
        (Some(s), None) => vec![parse_scalar::<u64>("seed", &s)?],
        (None, Some(s)) => parse_list::<u64>("seeds", &s)?,
        (None, None) => {
            return Err(Error::Config(
                "missing required key `seed` (or `seeds`); runs never draw entropy implicitly"
                    .into(),
            ))
        }
    };

    let dataset = parse_dataset_spec(
        &dataset_value,
        take("n_train"),
        take("n_test"),
        take("train_fraction"),
        take("format"),
    )?;

    let mut config = ExperimentConfig::with_defaults(dataset, seeds);

    if let Some(v) = take("measure") {
        config.measure = Some(parse_scalar("measure", &v)?);
    }
    if let Some(v) = take("methods") {
        config.methods = parse_list("methods", &v)?;
    }
    if let Some(v) = take("folds") {
        config.folds = parse_scalar("folds", &v)?;
    }
    if let Some(v) = take("loss") {
        config.loss = parse_scalar("loss", &v)?;
    }
    if let Some(v) = take("tol") {
        config.tol = parse_scalar("tol", &v)?;
    }
    if let Some(v) = take("max_iter") {
        config.max_iter = parse_scalar("max_iter", &v)?;
    }
    if let Some(v) = take("gamma_grid") {
        config.gamma_grid = parse_list("gamma_grid", &v)?;
    }
    if let Some(v) = take("r_grid") {
        config.r_grid = parse_list("r_grid", &v)?;
    }
    if let Some(v) = take("mu_grid") {
        config.mu_grid = parse_list("mu_grid", &v)?;
    }
    if let Some(v) = take("lambda_grid") {
        config.lambda_grid = parse_list("lambda_grid", &v)?;
    }
    if let Some(v) = take("k_grid") {
        config.k_grid = parse_list("k_grid", &v)?;
    }
    if let Some(v) = take("led_dim_grid") {
        config.led_dim_grid = parse_list("led_dim_grid", &v)?;
    }
    if let Some(v) = take("led_eigen") {
        config.led_eigen = parse_scalar("led_eigen", &v)?;
    }
    if let Some(v) = take("led_transductive") {
        config.led_transductive = parse_bool("led_transductive", &v)?;
    }
    if let Some(v) = take("omega_family") {
        config.omega.family = parse_scalar("omega_family", &v)?;
    }
    if let Some(v) = take("omega_length_min") {
        config.omega.length_min = Some(parse_scalar("omega_length_min", &v)?);
    }
    if let Some(v) = take("omega_length_max") {
        config.omega.length_max = Some(parse_scalar("omega_length_max", &v)?);
    }
    if let Some(v) = take("omega_size_min") {
        config.omega.size_min = Some(parse_scalar("omega_size_min", &v)?);
    }
    if let Some(v) = take("omega_size_max") {
        config.omega.size_max = Some(parse_scalar("omega_size_max", &v)?);
    }
    if let Some(v) = take("omega_alphabet_size") {
        config.omega.alphabet_size = Some(parse_scalar("omega_alphabet_size", &v)?);
    }
    if let Some(v) = take("omega_element_std") {
        config.omega.element_std = Some(parse_scalar("omega_element_std", &v)?);
    }
    if let Some(v) = take("omega_without_replacement") {
        config.omega.without_replacement = parse_bool("omega_without_replacement", &v)?;
    }
    if let Some(v) = take("standardize") {
        config.standardize = parse_bool("standardize", &v)?;
    }
    if let Some(v) = take("output") {
        config.output = Some(PathBuf::from(v));
    }
    if let Some(v) = take("output_format") {
        config.output_format = parse_scalar("output_format", &v)?;
    }

    debug_assert!(entries.is_empty(), "unconsumed known keys: {entries:?}");
    config.validate()?;
    Ok(config)
}

fn parse_dataset_spec(
    value: &str,
    n_train: Option<String>,
    n_test: Option<String>,
    train_fraction: Option<String>,
    format: Option<String>,
) -> Result<DatasetSpec> {
    if let Some(task) = value.strip_prefix("synthetic:") {
        if train_fraction.is_some() || format.is_some() {
            return Err(Error::Config(
                "train_fraction and format apply only to file datasets".into(),
            ));
        }
        let task: SyntheticTask = task.parse()?;
        let n_train = match n_train {
            Some(v) => parse_scalar("n_train", &v)?,
            None => 200,
        };
        let n_test = match n_test {
            Some(v) => parse_scalar("n_test", &v)?,
            None => 100,
        };
        Ok(DatasetSpec::Synthetic { task, n_train, n_test })
    } else {
        if n_train.is_some() || n_test.is_some() {
            return Err(Error::Config(
                "n_train and n_test apply only to synthetic datasets".into(),
            ));
        }
        let train_fraction = match train_fraction {
            Some(v) => parse_scalar("train_fraction", &v)?,
            None => 0.7,
        };
        let format = match format {
            Some(v) => Some(parse_scalar::<FileFormat>("format", &v)?),
            None => None,
        };
        Ok(DatasetSpec::File {
            path: PathBuf::from(value),
            format,
            train_fraction,
        })
    }
}

fn parse_scalar<T>(key: &str, value: &str) -> Result<T>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{value}`: {e}")))
}

fn parse_list<T>(key: &str, value: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|part| parse_scalar(key, part))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Config(format!(
            "key `{key}`: expected true or false, got `{other}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_synthetic_config() {
        let cfg = ExperimentConfig::parse("dataset = synthetic:motif-string\nseed = 7\n").unwrap();
        assert_eq!(
            cfg.dataset,
            DatasetSpec::Synthetic {
                task: SyntheticTask::MotifString,
                n_train: 200,
                n_test: 100
            }
        );
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.methods, Method::ALL.to_vec());
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.gamma_grid.len(), 9);
        assert_eq!(cfg.r_grid.last(), Some(&4096));
        assert_eq!(cfg.k_grid, vec![1, 3, 5, 7, 9]);
        assert!(cfg.standardize);
    }

    #[test]
    fn full_config_round_trip_of_fields() {
        let text = "\
# comment line
dataset = data/sample.str.txt
train_fraction = 0.8
measure = edit
methods = d2ke, knn
seeds = 1, 2, 3
folds = 5
loss = hinge-squared
tol = 1e-6
max_iter = 50
gamma_grid = 0.1, 1
r_grid = 16, 32
mu_grid = 0.01
lambda_grid = 0.1, 1
k_grid = 1, 3
led_dim_grid = 4
led_eigen = flip
led_transductive = true
omega_family = holdout
omega_without_replacement = false
omega_element_std = 2.0
standardize = false
output = out.tsv
output_format = json
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(
            cfg.dataset,
            DatasetSpec::File {
                path: PathBuf::from("data/sample.str.txt"),
                format: None,
                train_fraction: 0.8
            }
        );
        assert_eq!(cfg.measure, Some(Measure::Edit));
        assert_eq!(cfg.methods, vec![Method::D2ke, Method::Knn]);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.folds, 5);
        assert_eq!(cfg.loss, Loss::HingeSquared);
        assert_eq!(cfg.gamma_grid, vec![0.1, 1.0]);
        assert_eq!(cfg.omega.family, OmegaFamily::Holdout);
        assert!(!cfg.omega.without_replacement);
        assert_eq!(cfg.omega.element_std, Some(2.0));
        assert!(cfg.led_transductive);
        assert_eq!(cfg.output, Some(PathBuf::from("out.tsv")));
        assert_eq!(cfg.output_format, OutputFormat::Json);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentConfig::parse("dataset = synthetic:shifted-sine\nseed = 1\ngama_grid = 1\n")
            .unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("gama_grid"));
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err =
            ExperimentConfig::parse("dataset = synthetic:shifted-sine\nseed = 1\nseed = 2\n");
        assert!(err.is_err());
        let err = ExperimentConfig::parse("dataset = a\ndataset = b\nseed = 1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn seed_is_required() {
        let err = ExperimentConfig::parse("dataset = synthetic:motif-string\n").unwrap_err();
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn seed_and_seeds_conflict() {
        let err = ExperimentConfig::parse(
            "dataset = synthetic:motif-string\nseed = 1\nseeds = 1, 2\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("not both"));
    }

    #[test]
    fn synthetic_rejects_file_keys_and_vice_versa() {
        let err = ExperimentConfig::parse(
            "dataset = synthetic:motif-string\nseed = 1\ntrain_fraction = 0.5\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("file datasets"));
        let err =
            ExperimentConfig::parse("dataset = some/path.ts.tsv\nseed = 1\nn_train = 10\n")
                .unwrap_err();
        assert!(err.to_string().contains("synthetic"));
    }

    #[test]
    fn validation_catches_bad_values() {
        let bad = [
            ("folds = 1", "folds"),
            ("gamma_grid = 0", "gamma_grid"),
            ("gamma_grid = -1", "gamma_grid"),
            ("r_grid = 0", "r_grid"),
            ("methods = d2ke, d2ke", "twice"),
            ("omega_length_min = 9\nomega_length_max = 3", "exceeds"),
            ("omega_alphabet_size = 1", "alphabet"),
            ("tol = 0", "tol"),
            ("omega_element_std = 0", "element_std"),
        ];
        for (line, needle) in bad {
            let text = format!("dataset = synthetic:motif-string\nseed = 1\n{line}\n");
            let err = ExperimentConfig::parse(&text).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "case `{line}`: error `{err}` lacks `{needle}`"
            );
        }
        let err = ExperimentConfig::parse("dataset = synthetic:motif-string\nseeds = 4, 4\n")
            .unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let err = ExperimentConfig::parse("dataset synthetic:motif-string\n").unwrap_err();
        assert!(err.to_string().contains("key = value"));
        let err = ExperimentConfig::parse("dataset =\nseed = 1\n").unwrap_err();
        assert!(err.to_string().contains("no value"));
    }

    #[test]
    fn list_values_tolerate_spaces() {
        let cfg = ExperimentConfig::parse(
            "dataset = synthetic:two-cluster-sets\nseeds = 1 , 2 ,3\nk_grid = 1,3\n",
        )
        .unwrap();
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.k_grid, vec![1, 3]);
    }
}
