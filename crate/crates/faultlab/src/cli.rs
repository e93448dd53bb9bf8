//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 when a command fails at run time, 2 for bad flags and
//! invalid configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faultlab_core::cascade::{smtcnn_infer, smtcnn_train_full, Variant};
use faultlab_core::changepoint::ChangePointDetector;
use faultlab_core::eval::{render_report, run_experiment, seq_cv_plan, EvalReport, ExperimentData, ReportFormat, SharedStages};
use faultlab_core::seed::stage_seed;
use faultlab_core::segclass::{crossval_10fold, train_classifier, windowize, ClassifierKind};
use faultlab_core::sim::{generate_dataset, Regime, TimeSeriesDataset};

use crate::checkpoint::{load_cascade, save, save_cascade};
use crate::config::{ConfigError, RunConfig};
use crate::csv_io::{read_csv, write_csv};
use crate::files::{format_for, write_predictions, write_report, write_report_json, write_segments};

#[derive(Debug, Parser)]
#[command(name = "faultlab", version, about = "Simulate telemetry faults, train the detection cascade and evaluate it")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a simulated telemetry dataset.
    Gen(GenArgs),
    /// Train the change-point detector on normal-only data.
    TrainCpd(TrainCpdArgs),
    /// Train a segment classifier on anomaly-only data.
    TrainSeg(TrainSegArgs),
    /// Train every stage of one cascade variant.
    TrainSmtcnn(TrainSmtcnnArgs),
    /// Per-step predictions of a trained cascade.
    Infer(InferArgs),
    /// Sequential cross-validation of one or more variants.
    Eval(EvalArgs),
    /// Generate data, train every variant, evaluate, and write models and reports.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Global seed; overrides the config file and FAULTLAB_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    #[value(alias = "normal_only")]
    Normal,
    #[value(alias = "anomaly_only")]
    Anomaly,
    Mixed,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Normal => Regime::NormalOnly,
            RegimeArg::Anomaly => Regime::AnomalyOnly,
            RegimeArg::Mixed => Regime::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    B2,
    B3,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => Variant::Full,
            VariantArg::B2 => Variant::B2NoCpd,
            VariantArg::B3 => Variant::B3NoSegclass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Dt,
    Rf,
    Nb,
    Lr,
    Sgd,
    Svm,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Dt => ClassifierKind::DecisionTree,
            KindArg::Rf => ClassifierKind::RandomForest,
            KindArg::Nb => ClassifierKind::NaiveBayes,
            KindArg::Lr => ClassifierKind::LogisticRegression,
            KindArg::Sgd => ClassifierKind::SgdLinear,
            KindArg::Svm => ClassifierKind::LinearSvm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    #[value(alias = "md")]
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of records; defaults to the configured size of the regime.
    #[arg(long)]
    pub len: Option<usize>,
    /// Fraction of mixed-regime steps inside fault windows.
    #[arg(long)]
    pub rate: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainCpdArgs {
    /// Normal-only telemetry CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold multiplier in `mean + k·std`.
    #[arg(long)]
    pub k: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainSegArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Anomaly-only telemetry CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also print 10-fold cross-validated accuracy.
    #[arg(long)]
    pub crossval: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TrainSmtcnnArgs {
    #[arg(long)]
    pub mixed: PathBuf,
    #[arg(long)]
    pub normal: PathBuf,
    #[arg(long)]
    pub anomaly: PathBuf,
    /// Model directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Train an ablation instead of the full cascade.
    #[arg(long, value_enum)]
    pub ablation: Option<VariantArg>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Model directory written by `train-smtcnn` or `pipeline`.
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the proposed segments as `start,end` CSV.
    #[arg(long)]
    pub segments_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Mixed telemetry CSV; generated from the config when no file is given or found.
    #[arg(long)]
    pub mixed: Option<PathBuf>,
    #[arg(long)]
    pub normal: Option<PathBuf>,
    #[arg(long)]
    pub anomaly: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Variants to evaluate, in report order; defaults to the config's list.
    #[arg(long, value_enum)]
    pub variant: Vec<VariantArg>,
    #[arg(long)]
    pub plan_seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Report file; `.csv` selects CSV unless `--format` is given.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Also write per-fold results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Run only this variant.
    #[arg(long, value_enum)]
    pub ablation: Option<VariantArg>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// A bad flag value, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// 2 for usage and configuration errors, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>() || e.is::<ConfigError>()) {
        2
    } else {
        1
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::TrainCpd(a) => cmd_train_cpd(&a),
        Command::TrainSeg(a) => cmd_train_seg(&a),
        Command::TrainSmtcnn(a) => cmd_train_smtcnn(&a),
        Command::Infer(a) => cmd_infer(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
    }
}

fn setup(common: &Common) -> Result<(RunConfig, u64)> {
    let cfg = RunConfig::load_or_default(common.config.as_deref())?;
    let seed = cfg.resolve_seed(common.seed)?;
    Ok((cfg, seed))
}

fn read_input(path: &Path, regime: Option<Regime>) -> Result<TimeSeriesDataset> {
    read_csv(path, regime).with_context(|| format!("reading {}", path.display()))
}

fn summary(ds: &TimeSeriesDataset) -> String {
    let classes: BTreeSet<u8> = ds.records.iter().map(|r| r.fault_class).collect();
    let classes: Vec<String> = classes.iter().map(u8::to_string).collect();
    format!(
        "rows: {}\nfault fraction: {:.4}\nclasses present: {}",
        ds.len(),
        ds.anomaly_fraction(),
        classes.join(",")
    )
}

pub fn cmd_gen(a: &GenArgs) -> Result<()> {
    let (cfg, seed) = setup(&a.common)?;
    let regime = Regime::from(a.regime);
    let mut sim = cfg.sim_for(regime, seed);
    if let Some(n) = a.len {
        sim.length = n;
    }
    if let Some(r) = a.rate {
        sim.fault_rate = r;
    }
    sim.validate().map_err(|e| UsageError(e.to_string()))?;
    let ds = generate_dataset(regime, &sim).context("generating dataset")?;
    write_csv(&ds, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{}", summary(&ds));
    Ok(())
}

pub fn cmd_train_cpd(a: &TrainCpdArgs) -> Result<()> {
    let (cfg, seed) = setup(&a.common)?;
    let mut dc = cfg.cascade.detector.clone();
    if let Some(k) = a.k {
        if !k.is_finite() || k < 0.0 {
            return Err(UsageError(format!("--k must be a non-negative number, got {k}")).into());
        }
        dc.k = k;
    }
    dc.autoencoder.train.seed = stage_seed(seed, "changepoint");
    let normal = read_input(&a.input, Some(Regime::NormalOnly))?;
    let (det, fit) = ChangePointDetector::fit(&normal, &dc).context("training change-point detector")?;
    save(&det, Some(&dc), &a.out)?;
    println!(
        "epochs: {}\nthreshold: {} (mean {}, std {}, k {})",
        fit.history.len(),
        det.threshold.tau,
        det.threshold.mean,
        det.threshold.std,
        det.threshold.k
    );
    Ok(())
}

pub fn cmd_train_seg(a: &TrainSegArgs) -> Result<()> {
    let (cfg, seed) = setup(&a.common)?;
    let mut sc = cfg.cascade.segclass.clone();
    if let Some(k) = a.kind {
        sc.kind = k.into();
    }
    sc.seed = stage_seed(seed, "segclass");
    let anomaly = read_input(&a.input, Some(Regime::AnomalyOnly))?;
    let rows = windowize(&anomaly, cfg.cascade.prior.window, cfg.cascade.prior.stride)
        .context("building segment-classifier windows")?;
    let model = train_classifier(&rows, &sc).context("training segment classifier")?;
    save(&model, Some(&sc), &a.out)?;
    println!("kind: {}\nwindows: {}", sc.kind.short_name(), rows.len());
    if a.crossval {
        let cv = crossval_10fold(&rows, &sc, stage_seed(seed, "segclass/cv")).context("cross-validating segment classifier")?;
        println!("10-fold accuracy: {:.4} ± {:.4}", cv.report.mean.accuracy, cv.report.std.accuracy);
    }
    Ok(())
}

pub fn cmd_train_smtcnn(a: &TrainSmtcnnArgs) -> Result<()> {
    let (cfg, seed) = setup(&a.common)?;
    let variant = a.ablation.map_or(Variant::Full, Variant::from);
    let mixed = read_input(&a.mixed, Some(Regime::Mixed))?;
    let normal = read_input(&a.normal, Some(Regime::NormalOnly))?;
    let anomaly = read_input(&a.anomaly, Some(Regime::AnomalyOnly))?;
    let models = smtcnn_train_full(&mixed, &normal, &anomaly, &cfg.cascade, variant, seed)
        .with_context(|| format!("training {} cascade", variant.short_name()))?;
    save_cascade(&models, Some(&cfg.cascade), &a.out)?;
    println!("{} models written to {}", variant.short_name(), a.out.display());
    Ok(())
}

pub fn cmd_infer(a: &InferArgs) -> Result<()> {
    let models = load_cascade(&a.models)?;
    let ds = read_input(&a.input, None)?;
    let pred = smtcnn_infer(&ds.features(), &models).context("running the cascade")?;
    write_predictions(&a.out, &pred)?;
    if let Some(p) = &a.segments_out {
        write_segments(p, &pred.segments)?;
    }
    let flagged = pred.anomaly.iter().filter(|&&f| f).count();
    println!("steps: {}\nanomalous: {}\nsegments: {}", pred.classes.len(), flagged, pred.segments.len());
    Ok(())
}

/// The three datasets of an experiment, read from disk when present and generated otherwise.
struct Datasets {
    mixed: TimeSeriesDataset,
    normal: TimeSeriesDataset,
    anomaly: TimeSeriesDataset,
}

impl Datasets {
    fn generate(cfg: &RunConfig, seed: u64) -> Result<Self> {
        let gen = |regime| {
            generate_dataset(regime, &cfg.sim_for(regime, seed))
                .with_context(|| format!("generating {} dataset", regime.name()))
        };
        Ok(Self {
            mixed: gen(Regime::Mixed)?,
            normal: gen(Regime::NormalOnly)?,
            anomaly: gen(Regime::AnomalyOnly)?,
        })
    }

    fn obtain(cfg: &RunConfig, seed: u64, args: &DataArgs) -> Result<Self> {
        let one = |given: &Option<PathBuf>, regime: Regime| -> Result<TimeSeriesDataset> {
            let path = given.clone().unwrap_or_else(|| cfg.paths.datasets.join(dataset_file(regime)));
            if given.is_some() || path.exists() {
                log::info!("reading {}", path.display());
                read_input(&path, Some(regime))
            } else {
                log::info!("generating {} dataset", regime.name());
                generate_dataset(regime, &cfg.sim_for(regime, seed))
                    .with_context(|| format!("generating {} dataset", regime.name()))
            }
        };
        Ok(Self {
            mixed: one(&args.mixed, Regime::Mixed)?,
            normal: one(&args.normal, Regime::NormalOnly)?,
            anomaly: one(&args.anomaly, Regime::AnomalyOnly)?,
        })
    }

    fn data(&self) -> ExperimentData<'_> {
        ExperimentData {
            mixed: &self.mixed,
            normal: &self.normal,
            anomaly: &self.anomaly,
        }
    }
}

/// File name of a regime's dataset inside the datasets directory.
pub fn dataset_file(regime: Regime) -> &'static str {
    match regime {
        Regime::Mixed => "mixed.csv",
        Regime::NormalOnly => "normal.csv",
        Regime::AnomalyOnly => "anomaly.csv",
    }
}

fn evaluate(
    cfg: &RunConfig,
    data: &ExperimentData<'_>,
    shared: &SharedStages,
    variants: &[Variant],
    seed: u64,
) -> Result<Vec<EvalReport>> {
    let plan = seq_cv_plan(data.mixed.len(), cfg.eval.folds, cfg.plan_seed(seed)).context("planning folds")?;
    run_experiment(data, shared, &cfg.cascade, variants, &plan, seed).context("evaluation")
}

fn fit_shared(data: &ExperimentData<'_>, cfg: &RunConfig, seed: u64) -> Result<SharedStages> {
    SharedStages::fit(data, &cfg.cascade, seed).context("training change-point detector and segment classifier")
}

fn override_folds(cfg: &mut RunConfig, folds: Option<usize>) -> Result<()> {
    if let Some(f) = folds {
        if f == 0 {
            return Err(UsageError("--folds must be positive".into()).into());
        }
        cfg.eval.folds = f;
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let (mut cfg, seed) = setup(&a.common)?;
    override_folds(&mut cfg, a.folds)?;
    if a.plan_seed.is_some() {
        cfg.eval.plan_seed = a.plan_seed;
    }
    let variants: Vec<Variant> = if a.variant.is_empty() {
        cfg.eval.variants.clone()
    } else {
        a.variant.iter().map(|&v| v.into()).collect()
    };
    let format = a.format.map_or_else(|| format_for(&a.out), ReportFormat::from);
    let sets = Datasets::obtain(&cfg, seed, &a.data)?;
    let data = sets.data();
    let shared = fit_shared(&data, &cfg, seed)?;
    let reports = evaluate(&cfg, &data, &shared, &variants, seed)?;
    write_report(&a.out, &reports, format)?;
    if let Some(j) = &a.json {
        write_report_json(j, &reports)?;
    }
    print!("{}", render_report(&reports, ReportFormat::Markdown));
    Ok(())
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let (mut cfg, seed) = setup(&a.common)?;
    override_folds(&mut cfg, a.folds)?;
    let variants = match a.ablation {
        Some(v) => vec![Variant::from(v)],
        None => cfg.eval.variants.clone(),
    };
    for dir in [&cfg.paths.datasets, &cfg.paths.models, &cfg.paths.reports] {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let sets = Datasets::generate(&cfg, seed)?;
    for (ds, regime) in [
        (&sets.mixed, Regime::Mixed),
        (&sets.normal, Regime::NormalOnly),
        (&sets.anomaly, Regime::AnomalyOnly),
    ] {
        let path = cfg.paths.datasets.join(dataset_file(regime));
        write_csv(ds, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    let data = sets.data();
    log::info!("training shared stages");
    let shared = fit_shared(&data, &cfg, seed)?;
    for &v in &variants {
        log::info!("training {} on the whole mixed series", v.short_name());
        let models = shared
            .train_variant(&sets.mixed, &cfg.cascade, v, seed)
            .with_context(|| format!("training {} cascade", v.short_name()))?;
        save_cascade(&models, Some(&cfg.cascade), &cfg.paths.models.join(v.short_name()))?;
    }
    log::info!("running {}-fold evaluation", cfg.eval.folds);
    let reports = evaluate(&cfg, &data, &shared, &variants, seed)?;
    let dir = &cfg.paths.reports;
    write_report(&dir.join("report.md"), &reports, ReportFormat::Markdown)?;
    write_report(&dir.join("report.csv"), &reports, ReportFormat::Csv)?;
    write_report_json(&dir.join("report.json"), &reports)?;
    print!("{}", render_report(&reports, ReportFormat::Markdown));
    Ok(())
}
