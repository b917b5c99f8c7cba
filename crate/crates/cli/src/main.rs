//! `kcoreset`: coreset construction and kernel k-means clustering from the
//! command line. Every command is a pure function of its input files,
//! resolved configuration, and seed; artifacts land in the output directory
//! together with a manifest echoing the configuration and hashing inputs.

mod config;
mod output;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{
    defaults, kernel_dto, parse_mode, resolve_kernel, resolve_out_dir, ConfigEcho, FileConfig,
    KernelChoice,
};
use kernel_coreset::io::{self, CoresetSidecar, SolveTimings};
use kernel_coreset::{
    build_coreset, derive_seed, empirical_error, evaluate_on_full, ingest_csv, kmeanspp_seed,
    lloyd, merge_reduce_stream, spectral_cluster, AnalyticFactory, BuildConfig, BuildMode, Center,
    ClusteringSolution, Coreset, CoresetBuilder, DatasetHandle, ErrorProtocol, IngestOptions,
    KernelOracle, LloydConfig, SimilarityMatrix, SpectralConfig, StreamConfig, WeightedDataset,
    WeightedSet,
};

#[derive(Parser)]
#[command(
    name = "kcoreset",
    version,
    about = "Coresets for kernel (k,z)-clustering: build, evaluate, solve, spectral, stream"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coreset and write it as CSV plus a JSON sidecar.
    Build(BuildArgs),
    /// Measure empirical coreset error over repeated builds.
    EvalError(EvalErrorArgs),
    /// Solve kernel k-means on a coreset, then evaluate on the full dataset.
    Solve(SolveArgs),
    /// Spectral clustering via the weighted kernel k-means reduction.
    Spectral(SpectralArgs),
    /// Replay the input file as a stream and build a merge-and-reduce coreset.
    Stream(StreamArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Input dataset: headerless CSV, one point per row.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Treat the final CSV column as a strictly positive weight.
    #[arg(long)]
    weighted: bool,
    /// Uniform subsample (without replacement) to this many rows.
    #[arg(long)]
    subsample: Option<usize>,
    /// TOML config file; command-line flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel kind: linear (default), rbf, polynomial, precomputed.
    #[arg(long)]
    kernel: Option<String>,
    /// RBF bandwidth sigma.
    #[arg(long)]
    sigma: Option<f64>,
    /// Use exp(-||x-y|| / 2 sigma^2) instead of the squared-norm form.
    #[arg(long)]
    rbf_unsquared: bool,
    /// Polynomial kernel offset (default 0).
    #[arg(long)]
    c: Option<f64>,
    /// Polynomial kernel degree.
    #[arg(long)]
    degree: Option<u32>,
    /// Dense n x n matrix file (CSV or KCMX binary) for kernel=precomputed.
    #[arg(long)]
    kernel_matrix: Option<PathBuf>,
    /// Number of clusters (default 5).
    #[arg(short, long)]
    k: Option<usize>,
    /// Cost exponent z >= 1 (default 2 = kernel k-means).
    #[arg(short, long)]
    z: Option<f64>,
    /// Coreset sample count N (default 1000; spectral default 2000).
    #[arg(short = 'N', long)]
    coreset_size: Option<usize>,
    /// Accuracy parameter in (0,1) for the sample-count formula (default 0.1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Derive N from epsilon instead of --coreset-size.
    #[arg(long)]
    from_epsilon: bool,
    /// Construction mode: single (default) or iterated.
    #[arg(long)]
    mode: Option<String>,
    /// Master seed (default 0); reruns are bit-identical.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default "out"; KCORESET_OUT_DIR overrides the default).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; results are identical for any value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct EvalErrorArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Coreset procedure: importance (default), uniform, or identity.
    #[arg(long)]
    builder: Option<String>,
    /// Random center sets per repetition (default 500).
    #[arg(long)]
    center_sets: Option<usize>,
    /// Independent repetitions (default 100).
    #[arg(long)]
    repetitions: Option<usize>,
    /// Reuse one batch of center sets across repetitions.
    #[arg(long)]
    fixed_center_sets: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lloyd iteration cap (default 100).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop after k-means++ seeding; skip Lloyd refinement.
    #[arg(long)]
    seed_only: bool,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dense similarity matrix file (CSV or KCMX binary).
    #[arg(long)]
    similarity: Option<PathBuf>,
    /// Induce the similarity from --input vectors with the chosen kernel.
    #[arg(long)]
    induce_kernel: bool,
    /// Shared column sample for degree estimation (default 1000).
    #[arg(long)]
    degree_sample_size: Option<usize>,
    /// Exact O(n^2) degrees instead of sampling.
    #[arg(long)]
    exact_degrees: bool,
    /// Lloyd iteration cap (default 100).
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct StreamArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Points buffered per bucket (default 4x the coreset size).
    #[arg(long)]
    bucket_size: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::EvalError(args) => cmd_eval_error(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Spectral(args) => cmd_spectral(args),
        Command::Stream(args) => cmd_stream(args),
    };
    if let Err(err) = result {
        eprintln!("kcoreset: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// Distinct nonzero exit codes per failure stage.
fn exit_code(err: &anyhow::Error) -> i32 {
    use kernel_coreset::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::InvalidParameter(_)) | Some(E::SizeGuard(_)) => 2,
        Some(E::Io { .. }) | Some(E::Parse { .. }) => 3,
        Some(E::NonFinite { .. }) | Some(E::IndefiniteKernel { .. }) | Some(E::Serialize(_)) => 4,
        Some(E::EmptyCenters)
        | Some(E::EmptyInput(_))
        | Some(E::Degenerate(_))
        | Some(E::NonPositiveDegree { .. })
        | Some(E::IndexOutOfRange { .. }) => 5,
        None => 2,
    }
}

/// Everything a command needs after flag/config/default resolution.
struct Resolved {
    input: Option<PathBuf>,
    weighted: bool,
    subsample: Option<usize>,
    kernel: KernelChoice,
    k: usize,
    z: f64,
    coreset_size: usize,
    from_epsilon: bool,
    epsilon: f64,
    mode: BuildMode,
    mode_name: String,
    seed: u64,
    out_dir: PathBuf,
    threads: Option<usize>,
    file: FileConfig,
}

impl Resolved {
    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            input: self.input.as_ref().map(|p| p.display().to_string()),
            weighted: self.weighted,
            subsample: self.subsample,
            kernel: kernel_dto(&self.kernel),
            k: self.k,
            z: self.z,
            coreset_size: if self.from_epsilon {
                None
            } else {
                Some(self.coreset_size)
            },
            epsilon: self.epsilon,
            mode: self.mode_name.clone(),
            seed: self.seed,
            out_dir: self.out_dir.display().to_string(),
            threads: self.threads,
            center_sets: None,
            repetitions: None,
            builder: None,
            bucket_size: None,
            degree_sample_size: None,
            max_iters: None,
        }
    }
}

fn resolve_common(args: &CommonArgs, default_coreset_size: usize) -> anyhow::Result<Resolved> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let kernel = resolve_kernel(
        args.kernel.clone().or_else(|| file.kernel.clone()),
        args.sigma.or(file.sigma),
        args.rbf_unsquared || file.rbf_unsquared.unwrap_or(false),
        args.c.or(file.c),
        args.degree.or(file.degree),
        args.kernel_matrix.clone().or_else(|| file.kernel_matrix.clone()),
    )?;
    let mode_src = args.mode.clone().or_else(|| file.mode.clone());
    let mode = parse_mode(mode_src.clone())?;
    let threads = args.threads.or(file.threads);
    if let Some(t) = threads {
        // Errors only when a pool already exists (in-process tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out_dir = resolve_out_dir(args.out_dir.clone(), file.out_dir.clone());
    Ok(Resolved {
        input: args.input.clone(),
        weighted: args.weighted || file.weighted.unwrap_or(false),
        subsample: args.subsample.or(file.subsample),
        kernel,
        k: args.k.or(file.k).unwrap_or(defaults::K),
        z: args.z.or(file.z).unwrap_or(defaults::Z),
        coreset_size: args
            .coreset_size
            .or(file.coreset_size)
            .unwrap_or(default_coreset_size),
        from_epsilon: args.from_epsilon,
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(defaults::EPSILON),
        mode,
        mode_name: mode_src.unwrap_or_else(|| "single".into()),
        seed: args.seed.or(file.seed).unwrap_or(defaults::SEED),
        out_dir,
        threads,
        file,
    })
}

/// Loads the dataset and kernel oracle. With a precomputed kernel and no
/// input file, the universe is the matrix's opaque index set with unit
/// weights.
fn load_problem(r: &Resolved) -> anyhow::Result<(DatasetHandle<f64>, KernelOracle<f64>)> {
    match (&r.kernel, &r.input) {
        (KernelChoice::Analytic(spec), Some(path)) => {
            let opts = IngestOptions {
                weighted: r.weighted,
                subsample: r.subsample,
                seed: derive_seed(r.seed, 0x1267),
            };
            let dataset: DatasetHandle<f64> = Arc::new(ingest_csv(path, &opts)?);
            let oracle = KernelOracle::from_spec(dataset.clone(), spec.clone())?;
            Ok((dataset, oracle))
        }
        (KernelChoice::Analytic(_), None) => {
            anyhow::bail!("--input is required for analytic kernels")
        }
        (KernelChoice::Precomputed { matrix }, input) => {
            let m = io::load_matrix::<f64>(matrix)?;
            let dataset: DatasetHandle<f64> = match input {
                Some(path) => {
                    let opts = IngestOptions {
                        weighted: r.weighted,
                        subsample: r.subsample,
                        seed: derive_seed(r.seed, 0x1267),
                    };
                    Arc::new(ingest_csv(path, &opts)?)
                }
                None => Arc::new(WeightedDataset::opaque(m.n(), vec![1.0; m.n()])?),
            };
            let oracle = KernelOracle::precomputed(dataset.clone(), m)?;
            Ok((dataset, oracle))
        }
    }
}

fn input_files(r: &Resolved) -> Vec<PathBuf> {
    let mut files = Vec::new();
    if let Some(p) = &r.input {
        files.push(p.clone());
    }
    if let KernelChoice::Precomputed { matrix } = &r.kernel {
        files.push(matrix.clone());
    }
    files
}

fn build_config(r: &Resolved) -> BuildConfig<f64> {
    let mut cfg = BuildConfig::new(r.k, r.z, r.epsilon).with_mode(r.mode);
    if !r.from_epsilon {
        cfg = cfg.with_samples(r.coreset_size);
    }
    cfg
}

fn write_coreset_artifacts(
    r: &Resolved,
    coreset: &Coreset<f64>,
    oracle: &KernelOracle<f64>,
    mode_name: &str,
) -> anyhow::Result<(PathBuf, PathBuf)> {
    let csv_path = r.out_dir.join("coreset.csv");
    let json_path = r.out_dir.join("coreset.json");
    io::write_coreset_csv(&csv_path, coreset)?;
    let sidecar = CoresetSidecar {
        k: r.k,
        z: r.z,
        n_samples: if r.from_epsilon {
            None
        } else {
            Some(r.coreset_size)
        },
        seed: r.seed,
        mode: mode_name.to_string(),
        kernel: io::KernelSpecDto::from(&oracle.spec()),
        source_distinct: coreset.source_distinct,
        entries: coreset.len(),
        total_weight: coreset.total_weight(),
    };
    io::write_json(&json_path, &sidecar)?;
    Ok((csv_path, json_path))
}

#[derive(Serialize)]
struct BuildSummary {
    command: &'static str,
    n: usize,
    distinct: usize,
    coreset_entries: usize,
    total_weight: f64,
    identity: bool,
    elapsed_s: f64,
    outputs: Vec<String>,
}

fn cmd_build(args: BuildArgs) -> anyhow::Result<()> {
    let r = resolve_common(&args.common, defaults::CORESET_SIZE)?;
    std::fs::create_dir_all(&r.out_dir)
        .with_context(|| format!("cannot create {}", r.out_dir.display()))?;
    let (dataset, oracle) = load_problem(&r)?;
    let set = WeightedSet::full(&dataset);

    let t = Instant::now();
    let coreset = build_coreset(&oracle, &set, &build_config(&r), derive_seed(r.seed, 2))?;
    let elapsed = t.elapsed().as_secs_f64();

    let identity = coreset.len() == set.len();
    if identity {
        eprintln!(
            "warning: dataset has {} distinct elements, at most the requested size; \
             emitting the identity coreset",
            coreset.source_distinct
        );
    }
    let (csv_path, json_path) = write_coreset_artifacts(&r, &coreset, &oracle, &r.mode_name)?;
    let manifest = output::write_manifest(
        &r.out_dir,
        "build",
        r.echo(),
        &input_files(&r),
        &[csv_path.clone(), json_path.clone()],
    )?;
    output::print_summary(&BuildSummary {
        command: "build",
        n: dataset.len(),
        distinct: dataset.distinct_count(),
        coreset_entries: coreset.len(),
        total_weight: coreset.total_weight(),
        identity,
        elapsed_s: elapsed,
        outputs: vec![
            csv_path.display().to_string(),
            json_path.display().to_string(),
            manifest.display().to_string(),
        ],
    })
}

#[derive(Serialize)]
struct EvalSummary {
    command: &'static str,
    builder: String,
    mean: f64,
    min: f64,
    max: f64,
    std: f64,
    repetitions: usize,
    center_sets: usize,
    skipped_center_sets: usize,
    outputs: Vec<String>,
}

fn cmd_eval_error(args: EvalErrorArgs) -> anyhow::Result<()> {
    let r = resolve_common(&args.common, defaults::CORESET_SIZE)?;
    std::fs::create_dir_all(&r.out_dir)
        .with_context(|| format!("cannot create {}", r.out_dir.display()))?;
    let (dataset, oracle) = load_problem(&r)?;
    let _ = dataset;
    let set = WeightedSet::full(oracle.dataset());

    let builder_name = args
        .builder
        .or_else(|| r.file.builder.clone())
        .unwrap_or_else(|| "importance".into());
    let builder = match builder_name.as_str() {
        "importance" => CoresetBuilder::Importance {
            k: r.k,
            z: r.z,
            n_samples: r.coreset_size,
        },
        "uniform" => CoresetBuilder::Uniform {
            n_samples: r.coreset_size,
        },
        "identity" => CoresetBuilder::Identity,
        other => anyhow::bail!(
            "unknown builder {other:?}; expected importance, uniform, or identity"
        ),
    };
    let protocol = ErrorProtocol {
        k: r.k,
        num_center_sets: args
            .center_sets
            .or(r.file.center_sets)
            .unwrap_or(defaults::CENTER_SETS),
        num_repetitions: args
            .repetitions
            .or(r.file.repetitions)
            .unwrap_or(defaults::REPETITIONS),
        fixed_center_sets: args.fixed_center_sets || r.file.fixed_center_sets.unwrap_or(false),
    };

    let report = empirical_error(&oracle, &set, &builder, &protocol, r.seed)?;

    let csv_path = r.out_dir.join("error_report.csv");
    let json_path = r.out_dir.join("error_report.json");
    io::write_error_report_csv(&csv_path, &report)?;
    io::write_json(&json_path, &io::error_summary(&report))?;
    let mut echo = r.echo();
    echo.center_sets = Some(protocol.num_center_sets);
    echo.repetitions = Some(protocol.num_repetitions);
    echo.builder = Some(builder_name.clone());
    let manifest = output::write_manifest(
        &r.out_dir,
        "eval-error",
        echo,
        &input_files(&r),
        &[csv_path.clone(), json_path.clone()],
    )?;
    output::print_summary(&EvalSummary {
        command: "eval-error",
        builder: builder_name,
        mean: report.mean,
        min: report.min,
        max: report.max,
        std: report.std,
        repetitions: report.num_repetitions,
        center_sets: report.num_center_sets,
        skipped_center_sets: report.skipped_center_sets,
        outputs: vec![
            csv_path.display().to_string(),
            json_path.display().to_string(),
            manifest.display().to_string(),
        ],
    })
}

#[derive(Serialize)]
struct SolveSummary {
    command: &'static str,
    objective: f64,
    coreset_entries: usize,
    iterations: usize,
    build_s: f64,
    seed_s: f64,
    lloyd_s: f64,
    evaluate_s: f64,
    outputs: Vec<String>,
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let r = resolve_common(&args.common, defaults::CORESET_SIZE)?;
    std::fs::create_dir_all(&r.out_dir)
        .with_context(|| format!("cannot create {}", r.out_dir.display()))?;
    let (dataset, oracle) = load_problem(&r)?;
    let set = WeightedSet::full(&dataset);
    let max_iters = args
        .max_iters
        .or(r.file.max_iters)
        .unwrap_or(defaults::MAX_ITERS);
    let seed_only = args.seed_only || r.file.seed_only.unwrap_or(false);

    let t0 = Instant::now();
    let coreset = build_coreset(&oracle, &set, &build_config(&r), derive_seed(r.seed, 2))?;
    let build_s = t0.elapsed().as_secs_f64();

    let cset = coreset.as_set();
    let t1 = Instant::now();
    let init = kmeanspp_seed(&oracle, &cset, r.k, derive_seed(r.seed, 3))?;
    let seed_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let solution = if seed_only {
        let centers: Vec<Center<f64>> =
            init.indices.iter().map(|&i| Center::DataPoint(i)).collect();
        let on_coreset = kernel_coreset::cost_z(&oracle, &cset, &centers, r.z)?;
        ClusteringSolution {
            centers,
            assignment: on_coreset.assignment,
            objective: on_coreset.total,
            iterations: 0,
        }
    } else {
        let cfg = LloydConfig {
            max_iters,
            ..Default::default()
        };
        lloyd(&oracle, &cset, &init, r.k, &cfg)?
    };
    let lloyd_s = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let eval = evaluate_on_full(&oracle, &set, &solution)?;
    let evaluate_s = t3.elapsed().as_secs_f64();

    let timings = SolveTimings {
        build_s,
        seed_s,
        lloyd_s,
        evaluate_s,
    };
    let solution_path = r.out_dir.join("solution.json");
    let assignment_path = r.out_dir.join("assignment.csv");
    io::write_json(
        &solution_path,
        &io::solution_dto(&solution, eval.objective, r.seed, timings.clone()),
    )?;
    io::write_assignment_csv(&assignment_path, &eval.assignment)?;
    let mut echo = r.echo();
    echo.max_iters = Some(max_iters);
    let manifest = output::write_manifest(
        &r.out_dir,
        "solve",
        echo,
        &input_files(&r),
        &[solution_path.clone(), assignment_path.clone()],
    )?;
    output::print_summary(&SolveSummary {
        command: "solve",
        objective: eval.objective,
        coreset_entries: coreset.len(),
        iterations: solution.iterations,
        build_s: timings.build_s,
        seed_s: timings.seed_s,
        lloyd_s: timings.lloyd_s,
        evaluate_s: timings.evaluate_s,
        outputs: vec![
            solution_path.display().to_string(),
            assignment_path.display().to_string(),
            manifest.display().to_string(),
        ],
    })
}

#[derive(Serialize)]
struct SpectralSummary {
    command: &'static str,
    n: usize,
    k: usize,
    objective: f64,
    degree_mode: String,
    coreset_entries: usize,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct SpectralMetrics {
    objective: f64,
    degree_mode: String,
    coreset_entries: usize,
    degrees_s: f64,
    coreset_s: f64,
    solve_s: f64,
    assign_s: f64,
}

fn cmd_spectral(args: SpectralArgs) -> anyhow::Result<()> {
    let mut r = resolve_common(&args.common, defaults::SPECTRAL_CORESET_SIZE)?;
    // A config file may carry a dedicated spectral coreset size.
    if args.common.coreset_size.is_none() {
        if let Some(n) = r.file.spectral_coreset_size {
            r.coreset_size = n;
        }
    }
    std::fs::create_dir_all(&r.out_dir)
        .with_context(|| format!("cannot create {}", r.out_dir.display()))?;

    let mut inputs: Vec<PathBuf> = Vec::new();
    let similarity: Arc<SimilarityMatrix<f64>> = match (&args.similarity, args.induce_kernel) {
        (Some(path), false) => {
            inputs.push(path.clone());
            let m = io::load_matrix::<f64>(path)?;
            Arc::new(SimilarityMatrix::dense(m)?)
        }
        (None, true) => {
            let path = r
                .input
                .clone()
                .ok_or_else(|| anyhow::anyhow!("--induce-kernel needs --input"))?;
            inputs.push(path.clone());
            let spec = match &r.kernel {
                KernelChoice::Analytic(spec) => spec.clone(),
                KernelChoice::Precomputed { .. } => anyhow::bail!(
                    "--induce-kernel needs an analytic kernel; pass the matrix via --similarity instead"
                ),
            };
            let opts = IngestOptions {
                weighted: r.weighted,
                subsample: r.subsample,
                seed: derive_seed(r.seed, 0x1267),
            };
            let dataset: DatasetHandle<f64> = Arc::new(ingest_csv(&path, &opts)?);
            Arc::new(SimilarityMatrix::induced(dataset, spec)?)
        }
        (Some(_), true) => anyhow::bail!("pass either --similarity or --induce-kernel, not both"),
        (None, false) => anyhow::bail!("spectral needs --similarity FILE or --induce-kernel"),
    };

    let degree_sample_size = args
        .degree_sample_size
        .or(r.file.degree_sample_size)
        .unwrap_or(defaults::DEGREE_SAMPLE_SIZE);
    let cfg = SpectralConfig {
        coreset_size: r.coreset_size,
        degree_sample_size,
        exact_degrees: args.exact_degrees || r.file.exact_degrees.unwrap_or(false),
        lloyd: LloydConfig {
            max_iters: args
                .max_iters
                .or(r.file.max_iters)
                .unwrap_or(defaults::MAX_ITERS),
            ..Default::default()
        },
        first_seed: Default::default(),
    };
    let n = similarity.n();
    let out = spectral_cluster(similarity, r.k, &cfg, r.seed)?;

    let partition_path = r.out_dir.join("partition.csv");
    let metrics_path = r.out_dir.join("metrics.json");
    io::write_partition_csv(&partition_path, &out.partition)?;
    io::write_json(
        &metrics_path,
        &SpectralMetrics {
            objective: out.objective,
            degree_mode: io::degree_mode_name(out.degree_mode),
            coreset_entries: out.coreset_entries,
            degrees_s: out.timings.degrees_s,
            coreset_s: out.timings.coreset_s,
            solve_s: out.timings.solve_s,
            assign_s: out.timings.assign_s,
        },
    )?;
    let mut echo = r.echo();
    echo.degree_sample_size = Some(degree_sample_size);
    let manifest = output::write_manifest(
        &r.out_dir,
        "spectral",
        echo,
        &inputs,
        &[partition_path.clone(), metrics_path.clone()],
    )?;
    output::print_summary(&SpectralSummary {
        command: "spectral",
        n,
        k: r.k,
        objective: out.objective,
        degree_mode: io::degree_mode_name(out.degree_mode),
        coreset_entries: out.coreset_entries,
        outputs: vec![
            partition_path.display().to_string(),
            metrics_path.display().to_string(),
            manifest.display().to_string(),
        ],
    })
}

#[derive(Serialize)]
struct StreamSummary {
    command: &'static str,
    stream_len: usize,
    buckets: usize,
    levels_used: usize,
    peak_retained: usize,
    coreset_entries: usize,
    total_weight: f64,
    outputs: Vec<String>,
}

fn cmd_stream(args: StreamArgs) -> anyhow::Result<()> {
    let r = resolve_common(&args.common, defaults::CORESET_SIZE)?;
    std::fs::create_dir_all(&r.out_dir)
        .with_context(|| format!("cannot create {}", r.out_dir.display()))?;
    if r.weighted {
        anyhow::bail!("stream replays unit-weight points; --weighted is not supported here");
    }
    let spec = match &r.kernel {
        KernelChoice::Analytic(spec) => spec.clone(),
        KernelChoice::Precomputed { .. } => {
            anyhow::bail!("streaming needs an analytic kernel (linear, rbf, polynomial)")
        }
    };
    let path = r
        .input
        .clone()
        .ok_or_else(|| anyhow::anyhow!("--input is required for stream"))?;
    let opts = IngestOptions {
        weighted: false,
        subsample: r.subsample,
        seed: derive_seed(r.seed, 0x1267),
    };
    let dataset: DatasetHandle<f64> = Arc::new(ingest_csv(&path, &opts)?);

    let mut cfg = StreamConfig::new(r.k, r.z, r.coreset_size);
    if let Some(b) = args.bucket_size.or(r.file.bucket_size) {
        cfg.bucket_size = b;
    }
    let factory = AnalyticFactory { spec };
    let rows = (0..dataset.len()).map(|i| dataset.point(i).to_vec());
    let out = merge_reduce_stream(&factory, rows, &cfg, r.seed)?;

    // Indices in the coreset refer to input row numbers.
    let csv_path = r.out_dir.join("coreset.csv");
    let json_path = r.out_dir.join("coreset.json");
    io::write_coreset_csv(&csv_path, &out.coreset)?;
    let sidecar = CoresetSidecar {
        k: r.k,
        z: r.z,
        n_samples: Some(r.coreset_size),
        seed: r.seed,
        mode: "stream".into(),
        kernel: kernel_dto(&r.kernel),
        source_distinct: out.coreset.source_distinct,
        entries: out.coreset.len(),
        total_weight: out.coreset.total_weight(),
    };
    io::write_json(&json_path, &sidecar)?;
    let mut echo = r.echo();
    echo.bucket_size = Some(cfg.bucket_size);
    let manifest = output::write_manifest(
        &r.out_dir,
        "stream",
        echo,
        &[path],
        &[csv_path.clone(), json_path.clone()],
    )?;
    output::print_summary(&StreamSummary {
        command: "stream",
        stream_len: out.stream_len,
        buckets: out.buckets,
        levels_used: out.levels_used,
        peak_retained: out.peak_retained,
        coreset_entries: out.coreset.len(),
        total_weight: out.coreset.total_weight(),
        outputs: vec![
            csv_path.display().to_string(),
            json_path.display().to_string(),
            manifest.display().to_string(),
        ],
    })
}
