//! `d2ke` binary: distance queries, landmark sampling, embeddings, model
//! training and scoring, benchmark runs, and kernel diagnostics.
//!
//! Exit codes: 0 on success, 1 for configuration and usage errors, 2 for
//! runtime failures.

mod model;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d2ke::distance::pairwise_distances;
use d2ke::dataset::Dataset;
use d2ke::embedding::kernel_convergence_sweep;
use d2ke::experiment::{
    fit_d2ke, load_config, prepare_data, run_experiment, timing_scaling_report, OutputFormat,
};
use d2ke::gram::{dsk_kernel, DskKind};
use d2ke::io::{
    load_dataset, load_omega_sample, save_dataset, save_omega_sample, write_matrix, FileFormat,
};
use d2ke::sampling::sample_omegas;
use d2ke::synthetic::{gen_synthetic, SyntheticTask};
use d2ke::{
    EmbeddingModel, Error, GramMatrix, Measure, ObjectKind, OmegaDistribution, Result,
    StructuredObject,
};

use model::{SavedModel, SearchRecord, MODEL_FORMAT};

#[derive(Parser)]
#[command(
    name = "d2ke",
    version = d2ke::VERSION,
    about = "Distance-based random feature embeddings for structured objects"
)]
struct Cli {
    /// Cap on worker threads; 0 keeps one thread per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured benchmark and print the result table.
    Run(RunArgs),
    /// Print the distance between two stored objects.
    Distance(DistanceArgs),
    /// Draw landmark objects and write them to a file.
    Sample(SampleArgs),
    /// Embed a dataset with stored landmarks and write the feature matrix.
    Embed(EmbedArgs),
    /// Fit an embedding classifier with cross-validated hyperparameters.
    Train(TrainArgs),
    /// Score a saved model on a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Report Gram spectra and feature-map convergence for a dataset.
    AnalyzeKernel(AnalyzeKernelArgs),
    /// Generate a labeled synthetic dataset file.
    GenSynthetic(GenSyntheticArgs),
    /// Measure embedding cost against object and landmark counts.
    Timing(TimingArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the table here as well as printing it.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Table format: tsv or json. Overrides the config.
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct DistanceArgs {
    /// Measure: dtw, edit, or mod-hausdorff.
    #[arg(long)]
    measure: Measure,
    /// Dataset file holding the left object.
    #[arg(long)]
    a: PathBuf,
    /// Dataset file holding the right object.
    #[arg(long)]
    b: PathBuf,
    /// Object index in `--a` (0-based).
    #[arg(long, default_value_t = 0)]
    index_a: usize,
    /// Object index in `--b` (0-based).
    #[arg(long, default_value_t = 0)]
    index_b: usize,
}

#[derive(Args)]
struct SampleArgs {
    /// Number of landmarks to draw.
    #[arg(long)]
    r: usize,
    #[arg(long)]
    seed: u64,
    /// Destination; the suffix must match the landmark kind.
    #[arg(long)]
    output: PathBuf,
    /// Draw landmarks from this dataset instead of a synthetic family.
    #[arg(long)]
    from_data: Option<PathBuf>,
    /// Allow repeated landmarks when drawing from data.
    #[arg(long, requires = "from_data")]
    with_replacement: bool,
    /// Synthetic landmark kind: time-series, string, or vector-set.
    #[arg(long, conflicts_with = "from_data")]
    kind: Option<ObjectKind>,
    /// Shortest landmark length (series and strings; default 2).
    #[arg(long)]
    length_min: Option<usize>,
    /// Longest landmark length (series and strings; default 10).
    #[arg(long)]
    length_max: Option<usize>,
    /// Variables per series step (default 1).
    #[arg(long)]
    variables: Option<usize>,
    /// Standard deviation of series entries (default 1).
    #[arg(long)]
    element_std: Option<f64>,
    /// Symbol alphabet size for string landmarks (default 4).
    #[arg(long)]
    alphabet_size: Option<u32>,
    /// Smallest set size (default 3).
    #[arg(long)]
    size_min: Option<usize>,
    /// Largest set size (default 15).
    #[arg(long)]
    size_max: Option<usize>,
    /// Element dimension for set landmarks (default 3).
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Landmark file written by `sample`.
    #[arg(long)]
    model: PathBuf,
    /// Feature decay rate; must be positive.
    #[arg(long)]
    gamma: f64,
    /// Measure: dtw, edit, or mod-hausdorff.
    #[arg(long)]
    measure: Measure,
    /// Dataset to embed.
    #[arg(long)]
    data: PathBuf,
    /// Feature matrix destination (dense text).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment config file; grids, folds, and loss come from here.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed; required when the config lists several.
    #[arg(long)]
    seed: Option<u64>,
    /// Model destination (JSON).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Labeled dataset to score.
    #[arg(long)]
    data: PathBuf,
    /// Write one predicted label per line here.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeKernelArgs {
    /// Dataset to analyze.
    #[arg(long)]
    data: PathBuf,
    /// Defaults to the measure matching the data kind.
    #[arg(long)]
    measure: Option<Measure>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Landmark count for the feature-map Gram; landmarks are drawn from
    /// the data with replacement.
    #[arg(long, default_value_t = 128)]
    r: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Ascending comma-separated landmark counts; adds a convergence sweep.
    #[arg(long)]
    convergence: Option<String>,
    /// Independent trials per sweep level (at least 3).
    #[arg(long, default_value_t = 5)]
    trials: usize,
}

#[derive(Args)]
struct GenSyntheticArgs {
    /// Task: motif-string, shifted-sine, or two-cluster-sets.
    #[arg(long)]
    task: SyntheticTask,
    /// Number of objects (at least 4; labels alternate).
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Destination; the suffix must match the task's object kind.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct TimingArgs {
    /// Measure: dtw, edit, or mod-hausdorff.
    #[arg(long, default_value_t = Measure::Edit)]
    measure: Measure,
    /// Comma-separated object counts, ascending.
    #[arg(long, default_value = "250,500,1000,2000")]
    n_list: String,
    /// Comma-separated landmark counts, ascending.
    #[arg(long, default_value = "64,128,256,512")]
    r_list: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = install_thread_pool(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn install_thread_pool(threads: usize) -> Result<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool setup failed: {e}")))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run_run(args),
        Command::Distance(args) => run_distance(args),
        Command::Sample(args) => run_sample(args),
        Command::Embed(args) => run_embed(args),
        Command::Train(args) => run_train(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::AnalyzeKernel(args) => run_analyze_kernel(args),
        Command::GenSynthetic(args) => run_gen_synthetic(args),
        Command::Timing(args) => run_timing(args),
    }
}

/// File format implied by a path suffix, as a config error when absent.
fn detect_format(path: &Path) -> Result<FileFormat> {
    FileFormat::from_path(path).ok_or_else(|| {
        Error::Config(format!(
            "cannot infer a format for `{}`; expected a .ts.tsv, .str.txt, or .vset.jsonl suffix",
            path.display()
        ))
    })
}

fn load_any(path: &Path) -> Result<Dataset> {
    let format = detect_format(path)?;
    load_dataset(path, format.object_kind(), format)
}

fn check_suffix(path: &Path, kind: ObjectKind) -> Result<()> {
    let expect = FileFormat::for_kind(kind);
    match FileFormat::from_path(path) {
        Some(f) if f == expect => Ok(()),
        _ => Err(Error::Config(format!(
            "`{}` holds {} objects and needs the `{}` suffix",
            path.display(),
            kind,
            expect.suffix()
        ))),
    }
}

fn check_positive(flag: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Config(format!(
            "{flag} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn parse_usize_list(text: &str, flag: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<usize>().map_err(|_| {
                Error::Config(format!("{flag}: `{part}` is not a non-negative integer"))
            })
        })
        .collect()
}

fn run_run(args: RunArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seeds = vec![seed];
    }
    if let Some(format) = args.format {
        config.output_format = format;
    }
    if let Some(path) = args.output {
        config.output = Some(path);
    }
    let table = run_experiment(&config)?;
    let text = table.emit(config.output_format);
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    if let Some(path) = &config.output {
        table.write(path, config.output_format)?;
    }
    Ok(())
}

fn run_distance(args: DistanceArgs) -> Result<()> {
    let a = load_any(&args.a)?;
    let b = load_any(&args.b)?;
    let pick = |ds: &Dataset, index: usize, path: &Path| -> Result<StructuredObject> {
        ds.objects().get(index).cloned().ok_or_else(|| {
            Error::Config(format!(
                "index {index} out of range for `{}` with {} objects",
                path.display(),
                ds.len()
            ))
        })
    };
    let x = pick(&a, args.index_a, &args.a)?;
    let y = pick(&b, args.index_b, &args.b)?;
    for (path, obj) in [(&args.a, &x), (&args.b, &y)] {
        if obj.kind() != args.measure.object_kind() {
            return Err(Error::Config(format!(
                "measure {} expects {} objects, `{}` holds {}",
                args.measure,
                args.measure.object_kind(),
                path.display(),
                obj.kind()
            )));
        }
    }
    let d = args.measure.evaluate(&x, &y)?;
    println!("{d:.11e}");
    Ok(())
}

fn reject_knob(given: bool, flag: &str, kind: ObjectKind) -> Result<()> {
    if given {
        return Err(Error::Config(format!(
            "{flag} does not apply to {kind} landmarks"
        )));
    }
    Ok(())
}

fn build_distribution(args: &SampleArgs) -> Result<OmegaDistribution> {
    if let Some(path) = &args.from_data {
        let synthetic_knobs = args.length_min.is_some()
            || args.length_max.is_some()
            || args.variables.is_some()
            || args.element_std.is_some()
            || args.alphabet_size.is_some()
            || args.size_min.is_some()
            || args.size_max.is_some()
            || args.dim.is_some();
        if synthetic_knobs {
            return Err(Error::Config(
                "--from-data draws existing objects; synthetic shape flags do not apply".into(),
            ));
        }
        let source = load_any(path)?;
        return Ok(OmegaDistribution::DataHoldout {
            source,
            without_replacement: !args.with_replacement,
        });
    }
    let kind = args
        .kind
        .ok_or_else(|| Error::Config("give either --from-data or --kind".into()))?;
    match kind {
        ObjectKind::TimeSeries => {
            reject_knob(args.alphabet_size.is_some(), "--alphabet-size", kind)?;
            reject_knob(args.size_min.is_some() || args.size_max.is_some(), "--size-min/--size-max", kind)?;
            reject_knob(args.dim.is_some(), "--dim", kind)?;
            Ok(OmegaDistribution::RandomTimeSeries {
                length_min: args.length_min.unwrap_or(2),
                length_max: args.length_max.unwrap_or(10),
                n_variables: args.variables.unwrap_or(1),
                element_std: args.element_std.unwrap_or(1.0),
            })
        }
        ObjectKind::String => {
            reject_knob(args.variables.is_some(), "--variables", kind)?;
            reject_knob(args.element_std.is_some(), "--element-std", kind)?;
            reject_knob(args.size_min.is_some() || args.size_max.is_some(), "--size-min/--size-max", kind)?;
            reject_knob(args.dim.is_some(), "--dim", kind)?;
            Ok(OmegaDistribution::RandomString {
                length_min: args.length_min.unwrap_or(2),
                length_max: args.length_max.unwrap_or(10),
                alphabet_size: args.alphabet_size.unwrap_or(4),
            })
        }
        ObjectKind::VectorSet => {
            reject_knob(args.length_min.is_some() || args.length_max.is_some(), "--length-min/--length-max", kind)?;
            reject_knob(args.variables.is_some(), "--variables", kind)?;
            reject_knob(args.element_std.is_some(), "--element-std", kind)?;
            reject_knob(args.alphabet_size.is_some(), "--alphabet-size", kind)?;
            Ok(OmegaDistribution::RandomVectorSet {
                size_min: args.size_min.unwrap_or(3),
                size_max: args.size_max.unwrap_or(15),
                dim: args.dim.unwrap_or(3),
            })
        }
    }
}

fn run_sample(args: SampleArgs) -> Result<()> {
    if args.r == 0 {
        return Err(Error::Config("--r must be at least 1".into()));
    }
    let dist = build_distribution(&args)?;
    check_suffix(&args.output, dist.object_kind())?;
    let sample = sample_omegas(&dist, args.r, args.seed)?;
    save_omega_sample(&sample, &args.output)?;
    println!(
        "wrote {} landmarks ({}) to {}",
        sample.len(),
        sample.kind(),
        args.output.display()
    );
    Ok(())
}

fn run_embed(args: EmbedArgs) -> Result<()> {
    check_positive("--gamma", args.gamma)?;
    let omega_format = detect_format(&args.model)?;
    let omegas = load_omega_sample(&args.model, omega_format)?;
    if omegas.kind() != args.measure.object_kind() {
        return Err(Error::Config(format!(
            "measure {} expects {} landmarks, `{}` holds {}",
            args.measure,
            args.measure.object_kind(),
            args.model.display(),
            omegas.kind()
        )));
    }
    let data = load_any(&args.data)?;
    if data.kind() != args.measure.object_kind() {
        return Err(Error::Config(format!(
            "measure {} expects {} data, `{}` holds {}",
            args.measure,
            args.measure.object_kind(),
            args.data.display(),
            data.kind()
        )));
    }
    let embedder = EmbeddingModel::new(omegas, args.gamma, args.measure)?;
    let features = embedder.embed_dataset(&data)?;
    write_matrix(&args.out, &features)?;
    println!(
        "wrote {} x {} feature matrix to {}",
        features.nrows(),
        features.ncols(),
        args.out.display()
    );
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let config = load_config(&args.config)?;
    config.validate()?;
    let seed = match (args.seed, config.seeds.as_slice()) {
        (Some(s), _) => s,
        (None, [s]) => *s,
        (None, _) => {
            return Err(Error::Config(
                "training writes a single model; give --seed or a config with one seed".into(),
            ))
        }
    };
    let prep = prepare_data(&config, seed)?;
    let fit = fit_d2ke(&prep.train, prep.measure, &config, seed, config.omega.family)?;
    let saved = SavedModel {
        format: MODEL_FORMAT.to_string(),
        crate_version: d2ke::VERSION.to_string(),
        measure: prep.measure,
        gamma: fit.gamma,
        mu: fit.mu,
        loss: config.loss,
        seed,
        label_map: prep.train.meta().label_map.clone(),
        standardization: prep.standardization.clone(),
        omegas: fit.omegas.clone(),
        model: fit.model.clone(),
        search: SearchRecord {
            gamma_grid: config.gamma_grid.clone(),
            r_grid: config.r_grid.clone(),
            mu_grid: config.mu_grid.clone(),
            folds: config.folds,
            cv_accuracy: fit.cv_accuracy,
        },
    };
    saved.save(&args.output)?;
    println!(
        "trained on {} objects: gamma = {}, r = {}, mu = {}, cv accuracy = {:.2}%",
        prep.train.len(),
        fit.gamma,
        fit.omegas.len(),
        fit.mu,
        100.0 * fit.cv_accuracy
    );
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let saved = SavedModel::load(&args.model)?;
    let data = load_any(&args.data)?;
    if data.kind() != saved.measure.object_kind() {
        return Err(Error::Config(format!(
            "model embeds {} objects, `{}` holds {}",
            saved.measure.object_kind(),
            args.data.display(),
            data.kind()
        )));
    }
    let data = match &saved.standardization {
        Some(s) => s.apply(&data)?,
        None => data,
    };
    let embedder = EmbeddingModel::new(saved.omegas.clone(), saved.gamma, saved.measure)?;
    let features = embedder.embed_dataset(&data)?;
    let classes = saved.model.predict(&features)?;
    let predicted: Vec<i64> = classes
        .iter()
        .map(|&c| {
            saved.label_map.get(c).copied().ok_or_else(|| {
                Error::Numerical(format!("predicted class {c} outside the stored label map"))
            })
        })
        .collect::<Result<_>>()?;
    // Both files map labels independently; compare original label values.
    let correct = predicted
        .iter()
        .enumerate()
        .filter(|(i, &lab)| lab == data.original_label(data.labels()[*i]))
        .count();
    if let Some(path) = &args.predictions {
        let text: String = predicted.iter().map(|l| format!("{l}\n")).collect();
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    println!(
        "n = {}, correct = {}, accuracy = {:.2}%",
        data.len(),
        correct,
        100.0 * correct as f64 / data.len() as f64
    );
    Ok(())
}

fn run_analyze_kernel(args: AnalyzeKernelArgs) -> Result<()> {
    check_positive("--gamma", args.gamma)?;
    if args.r == 0 {
        return Err(Error::Config("--r must be at least 1".into()));
    }
    if args.trials < 3 {
        return Err(Error::Config("--trials must be at least 3".into()));
    }
    let data = load_any(&args.data)?;
    let measure = match args.measure {
        Some(m) if m.object_kind() != data.kind() => {
            return Err(Error::Config(format!(
                "measure {} expects {} data, `{}` holds {}",
                m,
                m.object_kind(),
                args.data.display(),
                data.kind()
            )));
        }
        Some(m) => m,
        None => Measure::default_for(data.kind()),
    };
    let dist = OmegaDistribution::DataHoldout {
        source: data.clone(),
        without_replacement: false,
    };
    let omegas = sample_omegas(&dist, args.r, args.seed)?;
    let embedder = EmbeddingModel::new(omegas, args.gamma, measure)?;
    let features = embedder.embed_dataset(&data)?;
    let rf_min = GramMatrix::from_features(&features).min_eigenvalue()?;
    let d = pairwise_distances(data.objects(), data.objects(), measure)?;
    let rbf_min = dsk_kernel(DskKind::Rbf, args.gamma, &d)?.min_eigenvalue()?;
    let nd_min = dsk_kernel(DskKind::Nd, args.gamma, &d)?.min_eigenvalue()?;
    println!(
        "dataset {}: n = {}, kind = {}, measure = {}, gamma = {}",
        args.data.display(),
        data.len(),
        data.kind(),
        measure,
        args.gamma
    );
    println!("feature-map gram (r = {}): min eigenvalue = {:+.6e}", args.r, rf_min);
    println!("dsk-rbf gram:              min eigenvalue = {:+.6e}", rbf_min);
    println!("dsk-nd gram:               min eigenvalue = {:+.6e}", nd_min);
    if let Some(spec) = &args.convergence {
        let r_list = parse_usize_list(spec, "--convergence")?;
        let pairs: Vec<(StructuredObject, StructuredObject)> = data
            .objects()
            .chunks_exact(2)
            .take(25)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Config(
                "a convergence sweep needs at least two objects".into(),
            ));
        }
        let report = kernel_convergence_sweep(
            &dist,
            args.gamma,
            measure,
            &pairs,
            &r_list,
            args.seed,
            args.trials,
        )?;
        println!(
            "convergence sweep ({} pairs, trials = {}, reference r = {}):",
            pairs.len(),
            report.trials,
            report.r_ref
        );
        for (i, (&r, &err)) in report.r_levels.iter().zip(&report.mean_errors).enumerate() {
            if i == 0 {
                println!("  r = {r:>6}: mean max error = {err:.6e}");
            } else {
                println!(
                    "  r = {r:>6}: mean max error = {err:.6e}  ratio = {:.3}",
                    report.ratios[i - 1]
                );
            }
        }
    }
    Ok(())
}

fn run_gen_synthetic(args: GenSyntheticArgs) -> Result<()> {
    if args.n < 4 {
        return Err(Error::Config(format!("--n must be at least 4, got {}", args.n)));
    }
    let ds = gen_synthetic(args.task, args.n, args.seed)?;
    check_suffix(&args.output, ds.kind())?;
    save_dataset(&ds, &args.output)?;
    println!(
        "wrote {} objects ({}) to {}",
        ds.len(),
        ds.kind(),
        args.output.display()
    );
    Ok(())
}

fn run_timing(args: TimingArgs) -> Result<()> {
    let n_list = parse_usize_list(&args.n_list, "--n-list")?;
    let r_list = parse_usize_list(&args.r_list, "--r-list")?;
    let report = timing_scaling_report(args.measure, &n_list, &r_list, args.seed)?;
    print!("{}", report.render());
    Ok(())
}
