//! The experiment driver: prepare data, tune each method by stratified
//! cross-validation on the training split, refit on the whole split, and
//! score the held-out test split.
//!
//! Every method row carries its own wall-clock time, including that
//! method's distance computations; nothing is shared between methods, so
//! timings are comparable. Selection ties resolve toward stronger
//! regularization (larger mu or lambda, then smaller gamma, then fewer
//! dimensions), keeping the chosen parameters deterministic.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use ndarray::Array2;

use crate::dataset::{Dataset, SplitTag};
use crate::distance::{pairwise_distances, Measure};
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::experiment::config::{DatasetSpec, ExperimentConfig, OmegaFamily, OmegaSettings};
use crate::experiment::table::{ResultRow, ResultTable, TableMeta};
use crate::experiment::Method;
use crate::gram::{
    dsk_kernel, dsk_value, pseudo_euclidean_embed, DskKind, GramConstruction, GramMatrix,
    PseudoEuclideanEmbedding,
};
use crate::io::{load_dataset, FileFormat};
use crate::learn::{
    cross_validate, predict_kernel, predict_linear, stratified_folds, train_kernel, train_linear,
    vote_from_distances, LinearModel,
};
use crate::objects::{ObjectKind, StructuredObject, TimeSeries};
use crate::sampling::{sample_omegas, OmegaDistribution, OmegaSample};
use crate::seeding::{derive_seed, STREAM_OMEGA};
use crate::synthetic::gen_synthetic;

/// Per-variable affine normalization fitted on training series and applied
/// to train and test alike.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    /// Pooled per-variable moments over every step of every training
    /// series. A variable with no spread keeps deviation 1 so the transform
    /// stays defined.
    pub fn fit(train: &Dataset) -> Result<Standardization> {
        if train.kind() != ObjectKind::TimeSeries {
            return Err(Error::InvalidArgument(format!(
                "standardization applies to time series, not {}",
                train.kind()
            )));
        }
        let v = train.objects()[0].as_time_series()?.n_variables();
        let mut sums = vec![0.0f64; v];
        let mut sq_sums = vec![0.0f64; v];
        let mut steps = 0usize;
        for obj in train.objects() {
            let ts = obj.as_time_series()?;
            if ts.n_variables() != v {
                return Err(Error::DimensionMismatch(format!(
                    "series mix {v} and {} variables",
                    ts.n_variables()
                )));
            }
            for row in ts.values().rows() {
                for (j, &x) in row.iter().enumerate() {
                    sums[j] += x;
                    sq_sums[j] += x * x;
                }
            }
            steps += ts.len();
        }
        let inv = 1.0 / steps as f64;
        let means: Vec<f64> = sums.iter().map(|s| s * inv).collect();
        let stds: Vec<f64> = sq_sums
            .iter()
            .zip(&means)
            .map(|(&sq, &m)| {
                let var = (sq * inv - m * m).max(0.0);
                let std = var.sqrt();
                if std < 1e-12 {
                    1.0
                } else {
                    std
                }
            })
            .collect();
        Ok(Standardization { means, stds })
    }

    pub fn apply_series(&self, ts: &TimeSeries) -> Result<TimeSeries> {
        if ts.n_variables() != self.means.len() {
            return Err(Error::DimensionMismatch(format!(
                "standardization fitted on {} variables, series has {}",
                self.means.len(),
                ts.n_variables()
            )));
        }
        let mut values = ts.values().clone();
        for mut row in values.rows_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (*x - self.means[j]) / self.stds[j];
            }
        }
        TimeSeries::new(values)
    }

    pub fn apply_object(&self, obj: &StructuredObject) -> Result<StructuredObject> {
        Ok(StructuredObject::TimeSeries(self.apply_series(obj.as_time_series()?)?))
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        ds.map_objects(|o| self.apply_object(o))
    }
}

/// Loaded, split, and normalized data ready for every method.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: Dataset,
    pub test: Dataset,
    pub measure: Measure,
    pub standardization: Option<Standardization>,
}

/// Realize the configured dataset for one seed.
///
/// Synthetic data is generated at `n_train + n_test` and split by position
/// (labels alternate, so both sides stay balanced); file data is split by
/// stratified draw. Time-series data is then standardized with training
/// statistics unless disabled.
pub fn prepare_data(config: &ExperimentConfig, seed: u64) -> Result<PreparedData> {
    let (train, test) = match &config.dataset {
        DatasetSpec::Synthetic { task, n_train, n_test } => {
            let ds = gen_synthetic(*task, n_train + n_test, seed)?;
            let train_idx: Vec<usize> = (0..*n_train).collect();
            let test_idx: Vec<usize> = (*n_train..n_train + n_test).collect();
            (
                ds.subset(&train_idx, SplitTag::Train)?,
                ds.subset(&test_idx, SplitTag::Test)?,
            )
        }
        DatasetSpec::File { path, format, train_fraction } => {
            let format = match format {
                Some(f) => *f,
                None => FileFormat::from_path(path).ok_or_else(|| {
                    Error::Config(format!(
                        "cannot infer the format of `{}`; name it *.ts.tsv, *.str.txt, or \
                         *.vset.jsonl, or set `format`",
                        path.display()
                    ))
                })?,
            };
            let ds = load_dataset(path, format.object_kind(), format)?;
            ds.split(*train_fraction, seed)?
        }
    };
    let kind = train.kind();
    let measure = match config.measure {
        Some(m) => {
            if m.object_kind() != kind {
                return Err(Error::Config(format!(
                    "measure {m} applies to {} data, but the dataset holds {kind}",
                    m.object_kind()
                )));
            }
            m
        }
        None => Measure::default_for(kind),
    };
    check_omega_keys_for_kind(&config.omega, kind)?;
    let standardization = if config.standardize && kind == ObjectKind::TimeSeries {
        Some(Standardization::fit(&train)?)
    } else {
        None
    };
    let (train, test) = match &standardization {
        Some(s) => (s.apply(&train)?, s.apply(&test)?),
        None => (train, test),
    };
    Ok(PreparedData { train, test, measure, standardization })
}

/// Kind-specific omega keys must match the data kind; catching this here
/// keeps a typo from silently running with defaults.
fn check_omega_keys_for_kind(omega: &OmegaSettings, kind: ObjectKind) -> Result<()> {
    if kind == ObjectKind::VectorSet {
        if omega.length_min.is_some() || omega.length_max.is_some() {
            return Err(Error::Config(
                "omega_length_* applies to series and strings; use omega_size_* for vector sets"
                    .into(),
            ));
        }
    } else if omega.size_min.is_some() || omega.size_max.is_some() {
        return Err(Error::Config(
            "omega_size_* applies to vector-set datasets".into(),
        ));
    }
    if kind != ObjectKind::String && omega.alphabet_size.is_some() {
        return Err(Error::Config(
            "omega_alphabet_size applies to string datasets".into(),
        ));
    }
    if kind != ObjectKind::TimeSeries && omega.element_std.is_some() {
        return Err(Error::Config(
            "omega_element_std applies to time-series datasets".into(),
        ));
    }
    Ok(())
}

/// Concrete landmark distribution for this data and family. Unset range
/// fields fall back to fixed defaults except the string length ceiling,
/// which tracks the median training length.
pub fn resolve_distribution(
    settings: &OmegaSettings,
    family: OmegaFamily,
    train: &Dataset,
) -> Result<OmegaDistribution> {
    match family {
        OmegaFamily::Holdout => Ok(OmegaDistribution::DataHoldout {
            source: train.clone(),
            without_replacement: settings.without_replacement,
        }),
        OmegaFamily::Random => match train.kind() {
            ObjectKind::TimeSeries => {
                let n_variables = train.objects()[0].as_time_series()?.n_variables();
                Ok(OmegaDistribution::RandomTimeSeries {
                    length_min: settings.length_min.unwrap_or(2),
                    length_max: settings.length_max.unwrap_or(10),
                    n_variables,
                    element_std: settings.element_std.unwrap_or(1.0),
                })
            }
            ObjectKind::String => {
                let mut lengths = Vec::with_capacity(train.len());
                let mut alphabet = 2u32;
                for obj in train.objects() {
                    let s = obj.as_string()?;
                    lengths.push(s.len());
                    alphabet = alphabet.max(s.alphabet_size());
                }
                lengths.sort_unstable();
                let median = lengths[lengths.len() / 2].max(2);
                let length_min = settings.length_min.unwrap_or(2);
                Ok(OmegaDistribution::RandomString {
                    length_min,
                    length_max: settings.length_max.unwrap_or_else(|| median.max(length_min)),
                    alphabet_size: settings.alphabet_size.unwrap_or(alphabet),
                })
            }
            ObjectKind::VectorSet => {
                let dim = train.objects()[0].as_vector_set()?.dim();
                Ok(OmegaDistribution::RandomVectorSet {
                    size_min: settings.size_min.unwrap_or(3),
                    size_max: settings.size_max.unwrap_or(15),
                    dim,
                })
            }
        },
    }
}

/// Run every configured method for every seed and assemble the table.
///
/// A method failure (say, a grid no dataset of this size can satisfy)
/// becomes an error row rather than aborting the other methods. With
/// several seeds, one aggregate row per fully successful method follows
/// the per-seed rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut measure_tag = String::new();
    for &seed in &config.seeds {
        let prep = prepare_data(config, seed)?;
        if measure_tag.is_empty() {
            measure_tag = prep.measure.tag().to_string();
        }
        for &method in &config.methods {
            rows.push(run_method(config, &prep, method, seed));
        }
    }
    if config.seeds.len() > 1 {
        let means: Vec<ResultRow> = config
            .methods
            .iter()
            .filter_map(|&m| mean_row(m, &rows))
            .collect();
        rows.extend(means);
    }
    let meta = TableMeta {
        version: crate::VERSION.to_string(),
        dataset: dataset_tag(&config.dataset),
        measure: measure_tag,
        seeds: config.seeds.clone(),
        threads: rayon::current_num_threads(),
    };
    Ok(ResultTable { meta, rows })
}

fn dataset_tag(spec: &DatasetSpec) -> String {
    match spec {
        DatasetSpec::Synthetic { task, n_train, n_test } => {
            format!("synthetic:{task} (train {n_train}, test {n_test})")
        }
        DatasetSpec::File { path, .. } => path.display().to_string(),
    }
}

fn mean_row(method: Method, rows: &[ResultRow]) -> Option<ResultRow> {
    let mine: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.method == method && r.seed.is_some())
        .collect();
    if mine.len() < 2 || mine.iter().any(|r| r.error.is_some()) {
        return None;
    }
    Some(ResultRow {
        method,
        seed: None,
        correct: mine.iter().map(|r| r.correct).sum(),
        total: mine.iter().map(|r| r.total).sum(),
        seconds: mine.iter().map(|r| r.seconds).sum::<f64>() / mine.len() as f64,
        r_used: None,
        params: BTreeMap::new(),
        error: None,
    })
}

struct MethodOutcome {
    correct: usize,
    total: usize,
    r_used: Option<usize>,
    params: BTreeMap<String, String>,
}

fn run_method(
    config: &ExperimentConfig,
    prep: &PreparedData,
    method: Method,
    seed: u64,
) -> ResultRow {
    let start = Instant::now();
    let outcome = match method {
        Method::Knn => run_knn(config, prep, seed),
        Method::D2ke => run_d2ke(config, prep, seed, config.omega.family),
        Method::Rsm => run_d2ke(config, prep, seed, OmegaFamily::Holdout),
        Method::DskRbf => run_dsk(config, prep, seed, DskKind::Rbf),
        Method::DskNd => run_dsk(config, prep, seed, DskKind::Nd),
        Method::GdkLed => run_gdk(config, prep, seed),
    };
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(o) => ResultRow {
            method,
            seed: Some(seed),
            correct: o.correct,
            total: o.total,
            seconds,
            r_used: o.r_used,
            params: o.params,
            error: None,
        },
        Err(e) => ResultRow {
            method,
            seed: Some(seed),
            correct: 0,
            total: 0,
            seconds,
            r_used: None,
            params: BTreeMap::new(),
            error: Some(e.to_string()),
        },
    }
}

fn count_correct(preds: &[usize], truth: &[usize]) -> usize {
    preds.iter().zip(truth).filter(|(p, t)| p == t).count()
}

fn gather_labels(labels: &[usize], idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|&i| labels[i]).collect()
}

/// Rows `rows` and columns `0..r` of `src`, scaled by `scale`.
fn gather_scaled(src: &Array2<f64>, rows: &[usize], r: usize, scale: f64) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), r));
    for (oi, &i) in rows.iter().enumerate() {
        for j in 0..r {
            out[(oi, j)] = src[(i, j)] * scale;
        }
    }
    out
}

/// The square block of `src` at `idx` x `idx`.
fn gather_square(src: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), idx.len()));
    for (oi, &i) in idx.iter().enumerate() {
        for (oj, &j) in idx.iter().enumerate() {
            out[(oi, oj)] = src[(i, j)];
        }
    }
    out
}

/// The rectangular block of `src` at `rows` x `cols`.
fn gather_rect(src: &Array2<f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), cols.len()));
    for (oi, &i) in rows.iter().enumerate() {
        for (oj, &j) in cols.iter().enumerate() {
            out[(oi, oj)] = src[(i, j)];
        }
    }
    out
}

fn run_knn(config: &ExperimentConfig, prep: &PreparedData, seed: u64) -> Result<MethodOutcome> {
    let train = &prep.train;
    let n = train.len();
    let labels = train.labels();
    let n_classes = train.n_classes();
    let folds = stratified_folds(labels, config.folds, seed)?;
    let d_train = pairwise_distances(train.objects(), train.objects(), prep.measure)?;

    let min_tr = folds.iter().map(|f| n - f.len()).min().unwrap();
    let grid: Vec<usize> = config.k_grid.iter().copied().filter(|&k| k <= min_tr).collect();
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "every k in k_grid exceeds the fold training size {min_tr}"
        )));
    }
    let outcome = cross_validate(
        &grid,
        &folds,
        n,
        |&k, tr, val| {
            let tr_labels = gather_labels(labels, tr);
            let mut correct = 0;
            for &v in val {
                let dists: Vec<f64> = tr.iter().map(|&i| d_train[(v, i)]).collect();
                if vote_from_distances(&dists, &tr_labels, n_classes, k)? == labels[v] {
                    correct += 1;
                }
            }
            Ok(correct as f64 / val.len() as f64)
        },
        // Ties go to the larger neighbourhood, the smoother rule.
        |a, b| a.cmp(b),
    )?;
    let k = outcome.best().params;

    let d_test = pairwise_distances(prep.test.objects(), train.objects(), prep.measure)?;
    let mut correct = 0;
    for (row, &label) in d_test.rows().into_iter().zip(prep.test.labels()) {
        let dists: Vec<f64> = row.iter().copied().collect();
        if vote_from_distances(&dists, labels, n_classes, k)? == label {
            correct += 1;
        }
    }
    let mut params = BTreeMap::new();
    params.insert("k".into(), k.to_string());
    params.insert("cv_acc".into(), outcome.best().mean_accuracy.to_string());
    Ok(MethodOutcome { correct, total: prep.test.len(), r_used: None, params })
}

/// Selected hyperparameters and the refit model for the random-feature
/// pipeline.
#[derive(Debug, Clone)]
pub struct D2keFit {
    /// The landmark sample, truncated to the selected width.
    pub omegas: OmegaSample,
    pub gamma: f64,
    pub mu: f64,
    /// Mean validation accuracy of the selected grid point.
    pub cv_accuracy: f64,
    pub model: LinearModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct D2keParams {
    gamma: f64,
    r: usize,
    mu: f64,
}

fn d2ke_prefer(a: &D2keParams, b: &D2keParams) -> std::cmp::Ordering {
    a.mu
        .partial_cmp(&b.mu)
        .unwrap()
        .then(b.gamma.partial_cmp(&a.gamma).unwrap())
        .then(b.r.cmp(&a.r))
}

/// Cross-validate (gamma, r, mu) over the training split and refit on all
/// of it.
///
/// Landmarks are drawn once at the largest grid width; smaller widths are
/// prefixes of the same draw, so the whole grid shares one training
/// distance matrix.
pub fn fit_d2ke(
    train: &Dataset,
    measure: Measure,
    config: &ExperimentConfig,
    seed: u64,
    family: OmegaFamily,
) -> Result<D2keFit> {
    let n = train.len();
    let labels = train.labels();
    let folds = stratified_folds(labels, config.folds, seed)?;
    let dist = resolve_distribution(&config.omega, family, train)?;

    let mut r_grid = config.r_grid.clone();
    if matches!(dist, OmegaDistribution::DataHoldout { without_replacement: true, .. }) {
        r_grid.retain(|&r| r <= n);
        if r_grid.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "every r in r_grid exceeds the {n} objects available for holdout landmarks"
            )));
        }
    }
    let r_max = *r_grid.iter().max().unwrap();
    let omegas = sample_omegas(&dist, r_max, derive_seed(seed, STREAM_OMEGA, 0))?;
    let d_train = pairwise_distances(train.objects(), omegas.objects(), measure)?;

    let mut grid = Vec::with_capacity(config.gamma_grid.len() * r_grid.len() * config.mu_grid.len());
    for &gamma in &config.gamma_grid {
        for &r in &r_grid {
            for &mu in &config.mu_grid {
                grid.push(D2keParams { gamma, r, mu });
            }
        }
    }

    // One exponentiated matrix per distinct gamma; grid order keeps equal
    // gammas adjacent, so a single slot suffices.
    let mut exp_cache: Option<(u64, Array2<f64>)> = None;
    let outcome = cross_validate(
        &grid,
        &folds,
        n,
        |p, tr, val| {
            let key = p.gamma.to_bits();
            if exp_cache.as_ref().map(|(k, _)| *k) != Some(key) {
                exp_cache = Some((key, d_train.mapv(|d| (-p.gamma * d).exp())));
            }
            let exp_d = &exp_cache.as_ref().unwrap().1;
            let scale = 1.0 / (p.r as f64).sqrt();
            let f_tr = gather_scaled(exp_d, tr, p.r, scale);
            let f_val = gather_scaled(exp_d, val, p.r, scale);
            let tr_labels = gather_labels(labels, tr);
            let model = train_linear(&f_tr, &tr_labels, p.mu, config.loss, config.tol, config.max_iter)?;
            let preds = predict_linear(&model, &f_val)?;
            Ok(count_correct(&preds, &gather_labels(labels, val)) as f64 / val.len() as f64)
        },
        d2ke_prefer,
    )?;
    let best = outcome.best().params;

    let exp_d = d_train.mapv(|d| (-best.gamma * d).exp());
    let all: Vec<usize> = (0..n).collect();
    let f_train = gather_scaled(&exp_d, &all, best.r, 1.0 / (best.r as f64).sqrt());
    let model = train_linear(&f_train, labels, best.mu, config.loss, config.tol, config.max_iter)?;
    Ok(D2keFit {
        omegas: omegas.prefix(best.r)?,
        gamma: best.gamma,
        mu: best.mu,
        cv_accuracy: outcome.best().mean_accuracy,
        model,
    })
}

fn run_d2ke(
    config: &ExperimentConfig,
    prep: &PreparedData,
    seed: u64,
    family: OmegaFamily,
) -> Result<MethodOutcome> {
    let fit = fit_d2ke(&prep.train, prep.measure, config, seed, family)?;
    let embedder = EmbeddingModel::new(fit.omegas.clone(), fit.gamma, prep.measure)?;
    let f_test = embedder.embed_dataset(&prep.test)?;
    let preds = predict_linear(&fit.model, &f_test)?;
    let correct = count_correct(&preds, prep.test.labels());
    let mut params = BTreeMap::new();
    params.insert("gamma".into(), fit.gamma.to_string());
    params.insert("mu".into(), fit.mu.to_string());
    params.insert("family".into(), family.tag().into());
    params.insert("cv_acc".into(), fit.cv_accuracy.to_string());
    Ok(MethodOutcome {
        correct,
        total: prep.test.len(),
        r_used: Some(fit.omegas.len()),
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct DskParams {
    gamma: f64,
    lambda: f64,
}

fn dsk_prefer(a: &DskParams, b: &DskParams) -> std::cmp::Ordering {
    a.lambda
        .partial_cmp(&b.lambda)
        .unwrap()
        .then(b.gamma.partial_cmp(&a.gamma).unwrap())
}

fn run_dsk(
    config: &ExperimentConfig,
    prep: &PreparedData,
    seed: u64,
    kind: DskKind,
) -> Result<MethodOutcome> {
    let train = &prep.train;
    let n = train.len();
    let labels = train.labels();
    let folds = stratified_folds(labels, config.folds, seed)?;
    let d_train = pairwise_distances(train.objects(), train.objects(), prep.measure)?;

    // The negative-distance kernel has no gamma; its grid is lambda alone.
    let gammas: Vec<f64> = match kind {
        DskKind::Rbf => config.gamma_grid.clone(),
        DskKind::Nd => vec![1.0],
    };
    let mut grid = Vec::with_capacity(gammas.len() * config.lambda_grid.len());
    for &gamma in &gammas {
        for &lambda in &config.lambda_grid {
            grid.push(DskParams { gamma, lambda });
        }
    }

    let construction = match kind {
        DskKind::Rbf => GramConstruction::DskRbf,
        DskKind::Nd => GramConstruction::DskNd,
    };
    let mut kernel_cache: Option<(u64, Array2<f64>)> = None;
    let outcome = cross_validate(
        &grid,
        &folds,
        n,
        |p, tr, val| {
            let key = p.gamma.to_bits();
            if kernel_cache.as_ref().map(|(k, _)| *k) != Some(key) {
                kernel_cache = Some((key, d_train.mapv(|d| dsk_value(kind, p.gamma, d))));
            }
            let kmat = &kernel_cache.as_ref().unwrap().1;
            let gram = GramMatrix::new(gather_square(kmat, tr), construction, false)?;
            let tr_labels = gather_labels(labels, tr);
            let model = train_kernel(&gram, &tr_labels, p.lambda)?;
            let preds = predict_kernel(&model, &gather_rect(kmat, val, tr))?;
            Ok(count_correct(&preds, &gather_labels(labels, val)) as f64 / val.len() as f64)
        },
        dsk_prefer,
    )?;
    let best = outcome.best().params;

    let gram = dsk_kernel(kind, best.gamma, &d_train)?;
    let model = train_kernel(&gram, labels, best.lambda)?;
    let d_cross = pairwise_distances(prep.test.objects(), train.objects(), prep.measure)?;
    let k_cross = d_cross.mapv(|d| dsk_value(kind, best.gamma, d));
    let preds = predict_kernel(&model, &k_cross)?;
    let correct = count_correct(&preds, prep.test.labels());

    let mut params = BTreeMap::new();
    params.insert("lambda".into(), best.lambda.to_string());
    if kind == DskKind::Rbf {
        params.insert("gamma".into(), best.gamma.to_string());
    }
    params.insert("cv_acc".into(), outcome.best().mean_accuracy.to_string());
    Ok(MethodOutcome { correct, total: prep.test.len(), r_used: None, params })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct GdkParams {
    r: usize,
    mu: f64,
}

fn gdk_prefer(a: &GdkParams, b: &GdkParams) -> std::cmp::Ordering {
    a.mu.partial_cmp(&b.mu).unwrap().then(b.r.cmp(&a.r))
}

fn run_gdk(config: &ExperimentConfig, prep: &PreparedData, seed: u64) -> Result<MethodOutcome> {
    let train = &prep.train;
    let n = train.len();
    let labels = train.labels();
    let folds = stratified_folds(labels, config.folds, seed)?;
    let d_train = pairwise_distances(train.objects(), train.objects(), prep.measure)?;

    let min_tr = folds.iter().map(|f| n - f.len()).min().unwrap();
    let dims: Vec<usize> = config.led_dim_grid.iter().copied().filter(|&r| r <= min_tr).collect();
    if dims.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "every dimension in led_dim_grid exceeds the fold training size {min_tr}"
        )));
    }
    let dim_max = *dims.iter().max().unwrap();
    let mut grid = Vec::with_capacity(dims.len() * config.mu_grid.len());
    for &r in &dims {
        for &mu in &config.mu_grid {
            grid.push(GdkParams { r, mu });
        }
    }

    // One full-width spectral embedding per fold, grown lazily and shared
    // by every grid point; truncation is a column prefix.
    let mut fold_embeds: Vec<Option<PseudoEuclideanEmbedding>> = vec![None; folds.len()];
    let fold_of: HashMap<usize, usize> =
        folds.iter().enumerate().map(|(i, f)| (f[0], i)).collect();
    let outcome = cross_validate(
        &grid,
        &folds,
        n,
        |p, tr, val| {
            let fi = fold_of[&val[0]];
            if fold_embeds[fi].is_none() {
                let block = gather_square(&d_train, tr);
                fold_embeds[fi] = Some(pseudo_euclidean_embed(&block, dim_max, config.led_eigen)?);
            }
            let emb = fold_embeds[fi].as_ref().unwrap().truncated(p.r)?;
            let tr_labels = gather_labels(labels, tr);
            let model = train_linear(
                emb.coordinates(),
                &tr_labels,
                p.mu,
                config.loss,
                config.tol,
                config.max_iter,
            )?;
            let mut f_val = Array2::zeros((val.len(), p.r));
            for (vi, &v) in val.iter().enumerate() {
                let dists: Vec<f64> = tr.iter().map(|&i| d_train[(v, i)]).collect();
                for (j, c) in emb.extend(&dists)?.into_iter().enumerate() {
                    f_val[(vi, j)] = c;
                }
            }
            let preds = predict_linear(&model, &f_val)?;
            Ok(count_correct(&preds, &gather_labels(labels, val)) as f64 / val.len() as f64)
        },
        gdk_prefer,
    )?;
    let best = outcome.best().params;

    let (f_train, f_test) = if config.led_transductive {
        let mut all = train.objects().to_vec();
        all.extend_from_slice(prep.test.objects());
        let d_all = pairwise_distances(&all, &all, prep.measure)?;
        let emb = pseudo_euclidean_embed(&d_all, best.r, config.led_eigen)?;
        let coords = emb.coordinates();
        (
            coords.slice(ndarray::s![..n, ..]).to_owned(),
            coords.slice(ndarray::s![n.., ..]).to_owned(),
        )
    } else {
        let emb = pseudo_euclidean_embed(&d_train, best.r, config.led_eigen)?;
        let d_cross = pairwise_distances(prep.test.objects(), train.objects(), prep.measure)?;
        let mut f_test = Array2::zeros((prep.test.len(), best.r));
        for (vi, row) in d_cross.rows().into_iter().enumerate() {
            let dists: Vec<f64> = row.iter().copied().collect();
            for (j, c) in emb.extend(&dists)?.into_iter().enumerate() {
                f_test[(vi, j)] = c;
            }
        }
        (emb.coordinates().clone(), f_test)
    };
    let model = train_linear(&f_train, labels, best.mu, config.loss, config.tol, config.max_iter)?;
    let preds = predict_linear(&model, &f_test)?;
    let correct = count_correct(&preds, prep.test.labels());

    let mut params = BTreeMap::new();
    params.insert("mu".into(), best.mu.to_string());
    params.insert("eigen".into(), config.led_eigen.tag().into());
    if config.led_transductive {
        params.insert("transductive".into(), "true".into());
    }
    params.insert("cv_acc".into(), outcome.best().mean_accuracy.to_string());
    Ok(MethodOutcome {
        correct,
        total: prep.test.len(),
        r_used: Some(best.r),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::DatasetSpec;
    use crate::synthetic::SyntheticTask;

    fn small_config(task: SyntheticTask, methods: Vec<Method>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::with_defaults(
            DatasetSpec::Synthetic { task, n_train: 24, n_test: 8 },
            vec![5],
        );
        cfg.methods = methods;
        cfg.folds = 3;
        cfg.gamma_grid = vec![0.5, 1.0];
        cfg.r_grid = vec![8, 16];
        cfg.mu_grid = vec![0.1];
        cfg.lambda_grid = vec![0.1, 1.0];
        cfg.k_grid = vec![1, 3];
        cfg.led_dim_grid = vec![4];
        cfg
    }

    #[test]
    fn knn_row_has_expected_shape() {
        let cfg = small_config(SyntheticTask::MotifString, vec![Method::Knn]);
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        assert_eq!(row.method, Method::Knn);
        assert_eq!(row.seed, Some(5));
        assert_eq!(row.total, 8);
        assert!(row.error.is_none());
        assert!(row.params.contains_key("k"));
        assert!((0.0..=100.0).contains(&row.accuracy_pct()));
        assert_eq!(table.meta.measure, "edit");
    }

    #[test]
    fn every_method_runs_on_tiny_data() {
        for task in [
            SyntheticTask::MotifString,
            SyntheticTask::ShiftedSine,
            SyntheticTask::TwoClusterSets,
        ] {
            let cfg = small_config(task, Method::ALL.to_vec());
            let table = run_experiment(&cfg).unwrap();
            assert_eq!(table.rows.len(), Method::ALL.len());
            for row in &table.rows {
                assert!(
                    row.error.is_none(),
                    "{} failed on {}: {:?}",
                    row.method,
                    task.tag(),
                    row.error
                );
                assert_eq!(row.total, 8);
            }
        }
    }

    #[test]
    fn identical_runs_match_exactly() {
        let cfg = small_config(SyntheticTask::MotifString, vec![Method::D2ke, Method::Knn]);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert!(a.same_results(&b));
    }

    #[test]
    fn multiple_seeds_append_mean_rows() {
        let mut cfg = small_config(SyntheticTask::MotifString, vec![Method::Knn]);
        cfg.seeds = vec![1, 2];
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 3);
        let mean = table.rows.last().unwrap();
        assert_eq!(mean.seed, None);
        assert_eq!(mean.total, 16);
        assert_eq!(
            mean.correct,
            table.rows[0].correct + table.rows[1].correct
        );
    }

    #[test]
    fn infeasible_method_becomes_error_row() {
        let mut cfg = small_config(SyntheticTask::MotifString, vec![Method::GdkLed, Method::Knn]);
        cfg.led_dim_grid = vec![64];
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].error.as_deref().unwrap().contains("led_dim_grid"));
        assert!(table.rows[1].error.is_none());
    }

    #[test]
    fn rsm_reports_holdout_family() {
        let cfg = small_config(SyntheticTask::MotifString, vec![Method::Rsm]);
        let table = run_experiment(&cfg).unwrap();
        let row = &table.rows[0];
        assert!(row.error.is_none());
        assert_eq!(row.params.get("family").map(String::as_str), Some("holdout"));
        assert!(row.r_used.unwrap() <= 16);
    }

    #[test]
    fn standardization_centers_training_series() {
        let cfg = small_config(SyntheticTask::ShiftedSine, vec![Method::Knn]);
        let prep = prepare_data(&cfg, 3).unwrap();
        let std = prep.standardization.expect("series data standardizes by default");
        assert_eq!(std.means.len(), 1);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut count = 0usize;
        for obj in prep.train.objects() {
            let ts = obj.as_time_series().unwrap();
            for &x in ts.values().iter() {
                sum += x;
                sq += x * x;
            }
            count += ts.len();
        }
        let mean = sum / count as f64;
        let var = sq / count as f64 - mean * mean;
        assert!(mean.abs() < 1e-12, "post-transform mean {mean}");
        assert!((var - 1.0).abs() < 1e-9, "post-transform variance {var}");
    }

    #[test]
    fn mismatched_measure_is_a_config_error() {
        let mut cfg = small_config(SyntheticTask::MotifString, vec![Method::Knn]);
        cfg.measure = Some(Measure::Dtw);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn kind_specific_omega_keys_are_checked() {
        let mut cfg = small_config(SyntheticTask::MotifString, vec![Method::Knn]);
        cfg.omega.size_min = Some(3);
        assert!(run_experiment(&cfg).unwrap_err().is_config());
        let mut cfg = small_config(SyntheticTask::TwoClusterSets, vec![Method::Knn]);
        cfg.omega.length_max = Some(9);
        assert!(run_experiment(&cfg).unwrap_err().is_config());
        let mut cfg = small_config(SyntheticTask::ShiftedSine, vec![Method::Knn]);
        cfg.omega.alphabet_size = Some(4);
        assert!(run_experiment(&cfg).unwrap_err().is_config());
    }

    #[test]
    fn file_dataset_round_trips_through_runner() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.str.txt");
        let ds = gen_synthetic(SyntheticTask::MotifString, 40, 11).unwrap();
        crate::io::save_dataset(&ds, &path).unwrap();
        let mut cfg = small_config(SyntheticTask::MotifString, vec![Method::Knn]);
        cfg.dataset = DatasetSpec::File { path, format: None, train_fraction: 0.6 };
        let table = run_experiment(&cfg).unwrap();
        assert!(table.rows[0].error.is_none());
        assert_eq!(table.rows[0].total, 16);
    }
}
