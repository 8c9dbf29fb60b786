//! Command-line surface for sketched discord mining.
//!
//! Every run writes exactly one JSON document to stdout; diagnostics go to
//! stderr. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal
//! invariant violation. Randomized commands take a `--seed` (falling back to
//! the `SKETCHCORD_SEED` environment variable, then 0) and echo it in their
//! output.

mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sketchcord::datagen::{
    gen_periodic, gen_random_walk, plant_discord, PeriodicConfig, PlantShape, PlantSpec,
    WalkConfig,
};
use sketchcord::detect::{
    detect_topk, detect_with_diagnostics, exact_discord, exact_discord_self,
};
use sketchcord::eval::{
    anomaly_scores, lemma_suite, roc_auc, score_density, success_rate_experiment, LabeledScores,
    LemmaSuiteConfig, SuccessRateConfig,
};
use sketchcord::profile::default_exclusion_radius;
use sketchcord::sketch::{sketch, SketchPlan};
use sketchcord::{DetectionConfig, Error as CoreError, JoinMode, MultiSeries};

#[derive(Parser)]
#[command(
    name = "sketchcord",
    version,
    about = "Fast discord mining in multidimensional time series via count-sketch compression"
)]
struct Cli {
    /// Cap rayon worker threads; results do not depend on the cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact multidimensional discord via per-dimension matrix-profile joins.
    Exact(ExactArgs),
    /// Sketched two-phase detection (time/group, then dimension recovery).
    Fast(FastArgs),
    /// Build a sketch file or apply dynamic updates to one.
    #[command(subcommand)]
    Sketch(SketchCmd),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Benchmarks and statistical suites.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Score-density comparison: all windows vs exact vs sketched discords.
    Density(DensityArgs),
    /// Per-window anomaly scores of one dimension, with ROC-AUC against labels.
    Score(ScoreArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Training CSV (header of dimension names, one row per time point).
    #[arg(long)]
    train: PathBuf,
    /// Test CSV; defaults to the training series in self mode.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Input layout is one dimension per row (name in the first field).
    #[arg(long)]
    transpose: bool,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Window length.
    #[arg(long)]
    m: usize,
    /// ab joins test against train; self mines one series with an exclusion zone.
    #[arg(long, default_value = "ab")]
    mode: ModeArg,
}

#[derive(Args)]
struct FastArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Window length.
    #[arg(long)]
    m: usize,
    /// Group count, or "auto" for ceil(sqrt(d)).
    #[arg(long, default_value = "auto", value_parser = parse_k)]
    k: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Re-join the full identified dimension to tighten index and score.
    #[arg(long)]
    refine: bool,
    /// Report the top K discords (greedy masking in phase 1).
    #[arg(long, default_value_t = 1)]
    top_k: usize,
    #[arg(long, default_value = "ab")]
    mode: ModeArg,
    /// Diagnostic hook, not for production: an injective plan (k = d, +1
    /// signs) that degenerates the sketch to per-dimension detection.
    #[arg(long)]
    debug_identity_plan: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Ab,
    #[value(name = "self")]
    SelfMode,
}

impl From<ModeArg> for JoinMode {
    fn from(mode: ModeArg) -> JoinMode {
        match mode {
            ModeArg::Ab => JoinMode::Ab,
            ModeArg::SelfMode => JoinMode::SelfJoin,
        }
    }
}

#[derive(Subcommand)]
enum SketchCmd {
    /// Sketch a dataset and persist it as JSON.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        transpose: bool,
        #[arg(long, default_value = "auto", value_parser = parse_k)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add every dimension of a CSV to an existing sketch.
    Add {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Subtract one dimension, given the same values originally added.
    Delete {
        #[arg(long)]
        sketch: PathBuf,
        /// Dimension name to remove.
        #[arg(long)]
        name: String,
        /// CSV holding that dimension's original values.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adjust one point of one dimension by a delta in normalized units.
    Update {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random-walk dimensions (cumulative normal steps).
    Walk {
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        step_std: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noisy-periodic train/test pair with aligned phases.
    Periodic {
        #[arg(long)]
        dims: usize,
        /// Joint period P.
        #[arg(long)]
        period: usize,
        /// Training length in joint periods.
        #[arg(long)]
        num_periods: usize,
        /// Per-point noise std in normalized units.
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Inject a discord of a chosen displacement norm into a dataset.
    Plant {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        transpose: bool,
        #[arg(long)]
        dimension: String,
        #[arg(long)]
        start: usize,
        #[arg(long)]
        m: usize,
        /// Displacement norm in the dimension's z-normalized scale.
        #[arg(long)]
        delta_norm: f64,
        #[arg(long, default_value = "bump")]
        shape: ShapeArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ShapeArg {
    Bump,
    Step,
    Burst,
}

impl From<ShapeArg> for PlantShape {
    fn from(shape: ShapeArg) -> PlantShape {
        match shape {
            ShapeArg::Bump => PlantShape::Bump,
            ShapeArg::Step => PlantShape::Step,
            ShapeArg::Burst => PlantShape::Burst,
        }
    }
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Success rate and speedup of sketched vs exact detection on random walks.
    SuccessRate {
        /// Comma-separated dimensionality grid.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: usize,
        /// Success when the sketched pick ranks within this top fraction.
        #[arg(long, default_value_t = 0.001)]
        threshold: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "auto", value_parser = parse_k)]
        k: usize,
        #[arg(long)]
        refine: bool,
    },
    /// Statistical suites: estimator moments, Chebyshev threshold, periodic
    /// recovery.
    Lemmas {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lemma1_trials: Option<usize>,
        #[arg(long)]
        chebyshev_seeds: Option<usize>,
        #[arg(long)]
        lemma2_seeds: Option<usize>,
    },
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    m: usize,
    /// Number of hash seeds for the sketched-discord population.
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "auto", value_parser = parse_k)]
    k: usize,
    #[arg(long)]
    refine: bool,
    /// When set, also write <prefix>_{all,exact,sketched}.csv histograms.
    #[arg(long)]
    hist_prefix: Option<String>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    dimension: String,
    #[arg(long)]
    m: usize,
    /// CSV with one 0/1 label per test window (header line required).
    #[arg(long)]
    labels: PathBuf,
    /// When set, write the per-window scores as CSV.
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

fn parse_k(raw: &str) -> Result<usize, String> {
    if raw == "auto" {
        return Ok(0);
    }
    let k: usize = raw
        .parse()
        .map_err(|_| "expected a positive integer or \"auto\"".to_string())?;
    if k == 0 {
        return Err("k must be >= 1 (or \"auto\")".to_string());
    }
    Ok(k)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<io::CsvError> for CliError {
    fn from(e: io::CsvError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {err}");
            return ExitCode::from(1);
        }
    }

    match std::panic::catch_unwind(move || run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Ok(Err(CliError::Data(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(3)
        }
    }
}

/// Seed resolution: flag, then SKETCHCORD_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("SKETCHCORD_SEED")
            .ok()
            .and_then(|raw| raw.parse().ok())
    })
    .unwrap_or(0)
}

fn emit<T: Serialize>(doc: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Data(format!("cannot serialize output: {e}")))?;
    println!("{json}");
    Ok(())
}

fn load_pair(data: &DataArgs, mode: JoinMode) -> Result<(MultiSeries, MultiSeries), CliError> {
    let train = io::load_csv(&data.train, data.transpose)?;
    let test = match (&data.test, mode) {
        (Some(path), _) => io::load_csv(path, data.transpose)?,
        (None, JoinMode::SelfJoin) => train.clone(),
        (None, JoinMode::Ab) => {
            return Err(CliError::Usage(
                "--test is required unless --mode self".to_string(),
            ))
        }
    };
    Ok((train, test))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Exact(args) => {
            let mode = JoinMode::from(args.mode);
            let (train, test) = load_pair(&args.data, mode)?;
            let report = match mode {
                JoinMode::Ab => exact_discord(&train, &test, args.m)?,
                JoinMode::SelfJoin => {
                    exact_discord_self(&train, args.m, default_exclusion_radius(args.m))?
                }
            };
            emit(&report)
        }
        Command::Fast(args) => {
            let mode = JoinMode::from(args.mode);
            let (train, test) = load_pair(&args.data, mode)?;
            let seed = resolve_seed(args.seed);
            let cfg = DetectionConfig {
                m: args.m,
                k: args.k,
                seed,
                refine: args.refine,
                mode,
                top_k: args.top_k,
            };
            if args.top_k > 1 {
                let reports = detect_topk(&train, &test, &cfg)?;
                return emit(&reports);
            }
            let plan = if args.debug_identity_plan {
                eprintln!("warning: --debug-identity-plan is a diagnostic hook (k = d, +1 signs)");
                SketchPlan::identity(&train.names().collect::<Vec<_>>())?
            } else {
                SketchPlan::new(&train.names().collect::<Vec<_>>(), args.k, seed)?
            };
            let (report, inert) = detect_with_diagnostics(&train, &test, &cfg, &plan)?;
            if !inert.is_empty() {
                eprintln!("note: inert sketched groups skipped in phase 1: {inert:?}");
            }
            emit(&report)
        }
        Command::Sketch(cmd) => run_sketch(cmd),
        Command::Gen(cmd) => run_gen(cmd),
        Command::Bench(cmd) => run_bench(cmd),
        Command::Density(args) => {
            let (train, test) = load_pair(&args.data, JoinMode::Ab)?;
            let seed = resolve_seed(args.seed);
            let report =
                score_density(&train, &test, args.m, args.trials, seed, args.k, args.refine)?;
            if let Some(prefix) = &args.hist_prefix {
                io::save_histogram(
                    std::path::Path::new(&format!("{prefix}_all.csv")),
                    &report.all_windows.histogram,
                )?;
                io::save_histogram(
                    std::path::Path::new(&format!("{prefix}_exact.csv")),
                    &report.exact_discords.histogram,
                )?;
                io::save_histogram(
                    std::path::Path::new(&format!("{prefix}_sketched.csv")),
                    &report.sketched_discords.histogram,
                )?;
            }
            emit(&report)
        }
        Command::Score(args) => {
            let (train, test) = load_pair(&args.data, JoinMode::Ab)?;
            let scores = anomaly_scores(&train, &test, &args.dimension, args.m)?;
            let labels = io::load_labels(&args.labels)?;
            let labeled = LabeledScores::new(scores.clone(), labels)?;
            let auc = roc_auc(&labeled);
            if let Some(path) = &args.scores_out {
                io::save_scores(path, &scores)?;
            }
            #[derive(Serialize)]
            struct ScoreOutput {
                dimension: String,
                m: usize,
                windows: usize,
                positives: usize,
                negatives: usize,
                auc: f64,
                scores_out: Option<String>,
            }
            let positives = labeled.labels().iter().filter(|&&l| l).count();
            emit(&ScoreOutput {
                dimension: args.dimension,
                m: args.m,
                windows: scores.len(),
                positives,
                negatives: scores.len() - positives,
                auc,
                scores_out: args.scores_out.map(|p| p.display().to_string()),
            })
        }
    }
}

#[derive(Serialize)]
struct SketchSummary {
    op: &'static str,
    out: String,
    seed: u64,
    k: usize,
    d: usize,
    n: usize,
}

fn sketch_summary(
    op: &'static str,
    out: &std::path::Path,
    sk: &sketchcord::SketchedSeries,
) -> SketchSummary {
    SketchSummary {
        op,
        out: out.display().to_string(),
        seed: sk.plan().seed(),
        k: sk.k(),
        d: sk.d(),
        n: sk.n(),
    }
}

fn run_sketch(cmd: SketchCmd) -> Result<(), CliError> {
    match cmd {
        SketchCmd::Build {
            input,
            transpose,
            k,
            seed,
            out,
        } => {
            let data = io::load_csv(&input, transpose)?;
            let seed = resolve_seed(seed);
            let plan = SketchPlan::new(&data.names().collect::<Vec<_>>(), k, seed)?;
            let sk = sketch(&data, &plan)?;
            io::save_sketch(&out, &sk).map_err(CliError::Data)?;
            emit(&sketch_summary("build", &out, &sk))
        }
        SketchCmd::Add {
            sketch,
            input,
            transpose,
            out,
        } => {
            let mut sk = io::load_sketch(&sketch).map_err(CliError::Data)?;
            let data = io::load_csv(&input, transpose)?;
            for (name, series) in data.iter() {
                sk = sk.add_dimension(name, series)?;
            }
            io::save_sketch(&out, &sk).map_err(CliError::Data)?;
            emit(&sketch_summary("add", &out, &sk))
        }
        SketchCmd::Delete {
            sketch,
            name,
            input,
            transpose,
            out,
        } => {
            let sk = io::load_sketch(&sketch).map_err(CliError::Data)?;
            let data = io::load_csv(&input, transpose)?;
            let series = data
                .dim(&name)
                .ok_or_else(|| CliError::Data(format!("input lacks dimension {name:?}")))?;
            let sk = sk.delete_dimension(&name, series)?;
            io::save_sketch(&out, &sk).map_err(CliError::Data)?;
            emit(&sketch_summary("delete", &out, &sk))
        }
        SketchCmd::Update {
            sketch,
            name,
            index,
            delta,
            out,
        } => {
            let sk = io::load_sketch(&sketch).map_err(CliError::Data)?;
            let sk = sk.update_point(&name, index, delta)?;
            io::save_sketch(&out, &sk).map_err(CliError::Data)?;
            emit(&sketch_summary("update", &out, &sk))
        }
    }
}

fn run_gen(cmd: GenCmd) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct GenSummary {
        op: &'static str,
        seed: u64,
        d: usize,
        paths: Vec<String>,
        n_train: usize,
        n_test: Option<usize>,
    }
    match cmd {
        GenCmd::Walk {
            dims,
            n,
            step_std,
            seed,
            out,
        } => {
            let seed = resolve_seed(seed);
            let data = gen_random_walk(&WalkConfig {
                d: dims,
                n,
                step_std,
                seed,
            })?;
            io::save_csv(&out, &data)?;
            emit(&GenSummary {
                op: "walk",
                seed,
                d: dims,
                paths: vec![out.display().to_string()],
                n_train: n,
                n_test: None,
            })
        }
        GenCmd::Periodic {
            dims,
            period,
            num_periods,
            eta,
            seed,
            train_out,
            test_out,
        } => {
            let seed = resolve_seed(seed);
            let (train, test) =
                gen_periodic(&PeriodicConfig::new(dims, period, num_periods, eta, seed))?;
            io::save_csv(&train_out, &train)?;
            io::save_csv(&test_out, &test)?;
            emit(&GenSummary {
                op: "periodic",
                seed,
                d: dims,
                paths: vec![
                    train_out.display().to_string(),
                    test_out.display().to_string(),
                ],
                n_train: train.n(),
                n_test: Some(test.n()),
            })
        }
        GenCmd::Plant {
            input,
            transpose,
            dimension,
            start,
            m,
            delta_norm,
            shape,
            out,
        } => {
            let data = io::load_csv(&input, transpose)?;
            let planted = plant_discord(
                &data,
                &PlantSpec {
                    dimension: dimension.clone(),
                    start,
                    m,
                    delta_norm,
                    shape: shape.into(),
                },
            )?;
            io::save_csv(&out, &planted)?;
            #[derive(Serialize)]
            struct PlantSummary {
                op: &'static str,
                dimension: String,
                start: usize,
                m: usize,
                delta_norm: f64,
                out: String,
            }
            emit(&PlantSummary {
                op: "plant",
                dimension,
                start,
                m,
                delta_norm,
                out: out.display().to_string(),
            })
        }
    }
}

fn run_bench(cmd: BenchCmd) -> Result<(), CliError> {
    match cmd {
        BenchCmd::SuccessRate {
            dims,
            n,
            m,
            trials,
            threshold,
            seed,
            k,
            refine,
        } => {
            let cfg = SuccessRateConfig {
                dims,
                n,
                m,
                trials,
                threshold,
                seed: resolve_seed(seed),
                k,
                refine,
            };
            #[derive(Serialize)]
            struct BenchOutput<'a> {
                config: &'a SuccessRateConfig,
                results: Vec<sketchcord::eval::SuccessRateResult>,
            }
            let results = success_rate_experiment(&cfg)?;
            emit(&BenchOutput {
                config: &cfg,
                results,
            })
        }
        BenchCmd::Lemmas {
            seed,
            lemma1_trials,
            chebyshev_seeds,
            lemma2_seeds,
        } => {
            let mut cfg = LemmaSuiteConfig::new(resolve_seed(seed));
            if let Some(trials) = lemma1_trials {
                cfg.lemma1_trials = trials;
            }
            if let Some(seeds) = chebyshev_seeds {
                cfg.chebyshev_seeds = seeds;
            }
            if let Some(seeds) = lemma2_seeds {
                cfg.lemma2_seeds = seeds;
            }
            let report = lemma_suite(&cfg)?;
            emit(&report)
        }
    }
}
