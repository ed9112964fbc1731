//! `resil` — experiment driver for outlier-detection resilience studies.
//!
//! Subcommands: generate | detect | sample | resilience | ensemble |
//! experiment | report. Exit codes: 0 success, 2 usage error, 3 data error,
//! 4 numerical failure.

mod config;
mod experiment;
mod output;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use outlier_resilience::seed::substream;
use outlier_resilience::synthgen::{generate, generate_fig1, OutlierDistribution, SynthSpec};
use outlier_resilience::{
    em_fit, evaluate_resilience, run_detector, stats, DetectorConfig, EmOptions, Error,
    EstimateMode, EvalOptions, LabelMatrix, Method, Result, SampleIndex, Scheme,
};

use config::{ExperimentConfig, GtColumn, Mode, SchemeCell};
use output::{opt, Provenance, Table};

#[derive(Parser)]
#[command(
    name = "resil",
    version,
    about = "Outlier-detection resilience experiments",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Generate(GenerateArgs),
    /// Run one detector on a dataset (optionally restricted to a sample).
    Detect(DetectArgs),
    /// Draw a sample of row indices from a dataset.
    Sample(SampleArgs),
    /// Estimate per-method resilience under one sampling scheme.
    Resilience(EstimateArgs),
    /// Estimate resilience of the EM consensus over several detectors.
    Ensemble(EnsembleArgs),
    /// Run a full experiment grid from a config file.
    Experiment(ExperimentArgs),
    /// Aggregate results directories into plot-ready tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of records.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Outlier distribution: dist1, dist2, or fig1 (the fixed bivariate
    /// dataset; ignores --n and --rate).
    #[arg(long, default_value = "dist1")]
    dist: String,
    /// Fraction of records drawn from the outlier distribution.
    #[arg(long, default_value_t = 0.05)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Input dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Detector: three_sigma, boxplot, chi_square, mad, mahalanobis,
    /// kmeans, or lof.
    #[arg(long)]
    method: String,
    /// Ground-truth column: auto (use is_outlier when present), none, or a
    /// column name.
    #[arg(long, default_value = "auto")]
    gt_column: String,
    /// Restrict detection to the sample in this file.
    #[arg(long)]
    sample: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    params: DetectorParams,
}

/// Detector parameter overrides (defaults match the library).
#[derive(Args)]
struct DetectorParams {
    #[arg(long)]
    top_fraction: Option<f64>,
    #[arg(long)]
    k_clusters: Option<usize>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    chi_sq_quantile: Option<f64>,
    #[arg(long)]
    mad_multiplier: Option<f64>,
    #[arg(long)]
    ridge_epsilon: Option<f64>,
    /// Cell-flag aggregation for column detectors: any or majority.
    #[arg(long)]
    aggregation: Option<String>,
}

impl DetectorParams {
    fn apply(&self, cfg: &mut DetectorConfig<f64>) -> Result<()> {
        if let Some(v) = self.top_fraction {
            cfg.top_fraction = v;
        }
        if let Some(v) = self.k_clusters {
            cfg.k_clusters = v;
        }
        if let Some(v) = self.min_pts {
            cfg.min_pts = v;
        }
        if let Some(v) = self.chi_sq_quantile {
            cfg.chi_sq_quantile = v;
        }
        if let Some(v) = self.mad_multiplier {
            cfg.mad_multiplier = v;
        }
        if let Some(v) = self.ridge_epsilon {
            cfg.ridge_epsilon = v;
        }
        if let Some(v) = &self.aggregation {
            cfg.aggregation = v.parse()?;
        }
        cfg.validate()
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Parent dataset CSV; its row count defines the index range.
    #[arg(long)]
    data: PathBuf,
    /// Scheme descriptor: random(size=K), block(n_blocks=B,block_size=S),
    /// or partition(k=K,part=P).
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Ground-truth column: auto, none, or a column name.
    #[arg(long, default_value = "auto")]
    gt_column: String,
    /// Comma-separated detector list; defaults to all seven.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Scheme grid cell: random(size=K) / random(pct=P) /
    /// block(n_blocks=B,block_size=S) / partition(k=K).
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// exact or blind.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    estimate: EstimateArgs,
    /// Also write the whole-dataset EM model report (text) here.
    #[arg(long)]
    model_report: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (flat dotted-key format).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's master_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Results directories produced by `resil experiment`.
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    /// Output directory for the aggregate tables.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Maps library errors onto the documented exit codes: misuse of the tool
/// is 2, unreadable or inconsistent data is 3, numerical failure is 4.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Range(_) => 2,
        Error::Parse { .. } | Error::Dimension(_) | Error::Io(_) | Error::Csv(_) => 3,
        Error::Domain(_) | Error::IllPosed(_) | Error::Numerical(_) => 4,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Detect(args) => cmd_detect(&args),
        Command::Sample(args) => cmd_sample(&args),
        Command::Resilience(args) => cmd_estimate(&args, false),
        Command::Ensemble(args) => {
            cmd_estimate(&args.estimate, true)?;
            if let Some(path) = &args.model_report {
                write_model_report(&args.estimate, path)?;
            }
            Ok(())
        }
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Report(args) => {
            let dirs: Vec<&Path> = args.results.iter().map(PathBuf::as_path).collect();
            report::run(&dirs, &args.out)
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let (dataset, config_lines) = if args.dist == "fig1" {
        let dataset = generate_fig1::<f64>(args.seed);
        (dataset, format!("generate.dist = fig1\ngenerate.seed = {}\n", args.seed))
    } else {
        let dist: OutlierDistribution = args.dist.parse()?;
        let spec = SynthSpec::new(args.n, dist, args.rate, args.seed);
        let dataset = generate(&spec)?;
        (
            dataset,
            format!(
                "generate.n = {}\ngenerate.dist = {}\ngenerate.rate = {}\ngenerate.seed = {}\n",
                args.n, dist, args.rate, args.seed
            ),
        )
    };
    let provenance = Provenance::new(config_lines, args.seed);
    let file = std::fs::File::create(&args.out)?;
    let mut w = std::io::BufWriter::new(file);
    provenance.write_header(&mut w)?;
    dataset.write_csv_to(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let mut cfg = DetectorConfig::new(method);
    args.params.apply(&mut cfg)?;
    let gt: GtColumn = args.gt_column.parse()?;
    let dataset = experiment::load_csv_dataset(&args.data, &gt)?;
    let sample = args
        .sample
        .as_ref()
        .map(|path| -> Result<SampleIndex> {
            let file = std::fs::File::open(path)?;
            SampleIndex::read_csv(std::io::BufReader::new(file))
        })
        .transpose()?;
    let result = run_detector(&dataset, &cfg, sample.as_ref(), args.seed)?;

    let mut config_lines = format!(
        "detect.data = {}\ndetect.method = {}\n",
        args.data.display(),
        method.name()
    );
    for (k, v) in cfg.params() {
        config_lines.push_str(&format!("detect.param.{k} = {v}\n"));
    }
    let provenance = Provenance::new(config_lines, args.seed);
    let file = std::fs::File::create(&args.out)?;
    let mut w = std::io::BufWriter::new(file);
    provenance.write_header(&mut w)?;
    result.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let dataset = experiment::load_csv_dataset(&args.data, &GtColumn::Auto)?;
    let n = dataset.n_rows();
    let scheme: Scheme = args.scheme.parse()?;
    let sample = match scheme {
        Scheme::Random { size } => outlier_resilience::random_sample(n, size, args.seed)?,
        Scheme::Block {
            n_blocks,
            block_size,
        } => outlier_resilience::block_sample(n, n_blocks, block_size, args.seed)?,
        Scheme::Partition { k, part } => {
            let mut parts = outlier_resilience::partition(n, k, args.seed)?;
            if part >= parts.len() {
                return Err(Error::Range(format!(
                    "partition part {part} out of range for k = {k}"
                )));
            }
            parts.swap_remove(part)
        }
    };
    let provenance = Provenance::new(
        format!(
            "sample.data = {}\nsample.scheme = {}\n",
            args.data.display(),
            scheme
        ),
        args.seed,
    );
    let file = std::fs::File::create(&args.out)?;
    let mut w = std::io::BufWriter::new(file);
    provenance.write_header(&mut w)?;
    sample.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Shared implementation of `resilience` (per-method estimates) and
/// `ensemble` (adds the EM consensus as one more row).
fn cmd_estimate(args: &EstimateArgs, with_ensemble: bool) -> Result<()> {
    let gt: GtColumn = args.gt_column.parse()?;
    let dataset = experiment::load_csv_dataset(&args.data, &gt)?;
    let detectors = parse_methods(&args.methods)?;
    let cell: SchemeCell = args.scheme.parse()?;
    let scheme = cell.resolve(dataset.n_rows());
    let mode: Mode = args.mode.parse()?;
    let estimate_mode = match mode {
        Mode::Exact => EstimateMode::Exact,
        Mode::Blind => EstimateMode::Blind,
    };
    let mut options = EvalOptions::new(estimate_mode.into());
    if with_ensemble {
        options = options.with_ensemble();
    }
    let report = evaluate_resilience(
        &dataset,
        &detectors,
        scheme,
        args.replicates,
        &options,
        args.seed,
    )?;

    let mut table = Table::new([
        "dataset",
        "method",
        "scheme",
        "mode",
        "replicates",
        "n_samples",
        "sample_size",
        "mean_rho",
        "sd_rho",
    ]);
    let mut push_estimate = |est: outlier_resilience::ResilienceEstimate<f64>| {
        table.push(vec![
            dataset.id().to_string(),
            est.method.clone(),
            est.scheme.to_string(),
            estimate_mode.to_string(),
            args.replicates.to_string(),
            est.per_replicate.len().to_string(),
            est.sample_size.to_string(),
            est.mean.to_string(),
            opt(est.sd),
        ]);
    };
    for m in 0..report.methods.len() {
        push_estimate(report.method_estimate(m, estimate_mode)?);
    }
    if with_ensemble {
        push_estimate(report.ensemble_estimate(estimate_mode)?);
    }

    let provenance = Provenance::new(
        format!(
            "estimate.data = {}\nestimate.methods = {}\nestimate.scheme = {}\n\
             estimate.replicates = {}\nestimate.mode = {}\nestimate.ensemble = {}\n",
            args.data.display(),
            detectors
                .iter()
                .map(|d| d.method.name())
                .collect::<Vec<_>>()
                .join(", "),
            scheme,
            args.replicates,
            mode,
            with_ensemble
        ),
        args.seed,
    );
    table.write_file(&args.out, &provenance)
}

/// Fits the EM model over all whole-dataset detector runs and writes its
/// text report.
fn write_model_report(args: &EstimateArgs, path: &Path) -> Result<()> {
    let gt: GtColumn = args.gt_column.parse()?;
    let dataset = experiment::load_csv_dataset(&args.data, &gt)?;
    let detectors = parse_methods(&args.methods)?;
    let results: Vec<_> = detectors
        .iter()
        .enumerate()
        .map(|(m, cfg)| run_detector(&dataset, cfg, None, substream(args.seed, "whole", m as u64)))
        .collect::<Result<_>>()?;
    let votes = LabelMatrix::from_results(&results)?;
    let model = em_fit::<f64>(&votes, &EmOptions::default());
    std::fs::write(path, model.report())?;
    Ok(())
}

fn parse_methods(list: &str) -> Result<Vec<DetectorConfig<f64>>> {
    if list == "all" {
        return Ok(Method::ALL.iter().map(|&m| DetectorConfig::new(m)).collect());
    }
    list.split(',')
        .map(|name| Ok(DetectorConfig::new(name.trim().parse::<Method>()?)))
        .collect()
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    let dataset = experiment::materialize_dataset(&config)?;
    let results = experiment::run(&config, &dataset)?;
    experiment::write_results(&config, &results, &config.output_dir.clone())?;
    let skipped = results.skipped.n_rows();
    let mean_note = summary_note(&results);
    println!(
        "experiment {}: {} summary rows, {} skipped, results in {}{}",
        config.name,
        results.summary.n_rows(),
        skipped,
        config.output_dir.display(),
        mean_note
    );
    Ok(())
}

/// A one-line human digest of the summary table for the terminal.
fn summary_note(results: &experiment::ExperimentResults) -> String {
    let mut means = Vec::new();
    let mut buf = Vec::new();
    if results
        .summary
        .write_to(&mut buf, &Provenance::new(String::new(), 0))
        .is_err()
    {
        return String::new();
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(buf.as_slice());
    let Ok(headers) = rdr.headers() else {
        return String::new();
    };
    let Some(idx) = headers.iter().position(|h| h == "mean_rho") else {
        return String::new();
    };
    for record in rdr.records().flatten() {
        if let Some(v) = record.get(idx).and_then(|s| s.parse::<f64>().ok()) {
            means.push(v);
        }
    }
    if means.is_empty() {
        String::new()
    } else {
        format!(" (grand mean rho {:.4})", stats::mean(&means))
    }
}
