//! The experiment runner: materializes the dataset, walks the scheme grid,
//! and writes the results tables.
//!
//! Files written into `output_dir`:
//!   - `replicates.csv` — one row per (method, scheme cell, replicate, part)
//!     with the per-sample resilience values and, in blind mode, the EM rate
//!     estimates next to the ground-truth-measured rates.
//!   - `summary.csv`    — one row per (method, scheme cell); means, sd (only
//!     when replicates > 1), MSE of blind vs exact, RMSE of the EM rate
//!     estimates.
//!   - `skipped.csv`    — one row per (method, scheme cell) that could not
//!     run, with the reason. #summary + #skipped = grid size, always.
//!   - `quality.csv`    — only when ground truth exists: whole-dataset
//!     precision/recall/F1 per method next to its mean resilience.
//!   - `config.txt`     — the canonical configuration this run resolved to.
//!
//! All randomness flows from `master_seed` through named substreams: the
//! dataset draw uses one stream, every grid cell another, the quality runs a
//! third. Cells execute in a rayon pool and results are assembled in grid
//! order, so outputs are byte-identical regardless of thread scheduling.

use std::path::Path;

use rayon::prelude::*;

use outlier_resilience::seed::substream;
use outlier_resilience::synthgen::{generate, generate_fig1, SynthSpec};
use outlier_resilience::{
    confusion, em_fit, evaluate_resilience, rates, run_detector, stats, Dataset, DetectionResult,
    EmOptions, Error, EstimateMode, EvalOptions, EvaluationMode, LabelMatrix, RatePanel,
    ResilienceReport, Result, SchemeSpec,
};

use crate::config::{DatasetSource, ExperimentConfig, GtColumn, Mode};
use crate::output::{opt, Provenance, Table};

/// Loads or generates the configured dataset.
pub fn materialize_dataset(config: &ExperimentConfig) -> Result<Dataset<f64>> {
    match &config.dataset {
        DatasetSource::Synth { n, dist, rate } => generate(&SynthSpec::new(
            *n,
            *dist,
            *rate,
            substream(config.master_seed, "dataset", 0),
        )),
        DatasetSource::Fig1 => Ok(generate_fig1(substream(config.master_seed, "dataset", 0))),
        DatasetSource::Csv { path, gt_column } => load_csv_dataset(path, gt_column),
    }
}

/// Loads a CSV dataset honoring the ground-truth column policy.
pub fn load_csv_dataset(path: &Path, gt: &GtColumn) -> Result<Dataset<f64>> {
    let column = match gt {
        GtColumn::None => None,
        GtColumn::Named(name) => Some(name.clone()),
        GtColumn::Auto => {
            let text = std::fs::read_to_string(path)?;
            let header = text
                .lines()
                .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                .unwrap_or("");
            header
                .split(',')
                .any(|field| field.trim() == "is_outlier")
                .then(|| "is_outlier".to_string())
        }
    };
    Dataset::load_csv(path, column.as_deref())
}

/// One grid cell's outcome: a full report, or the reason it could not run.
enum CellOutcome {
    Ran(Box<ResilienceReport<f64>>),
    Skipped(String),
}

/// Everything the run produced, kept in memory until serialized.
pub struct ExperimentResults {
    pub replicates: Table,
    pub summary: Table,
    pub skipped: Table,
    pub quality: Option<Table>,
    pub grid_size: usize,
}

/// Runs the configured grid and assembles the results tables.
pub fn run(config: &ExperimentConfig, dataset: &Dataset<f64>) -> Result<ExperimentResults> {
    let n = dataset.n_rows();
    let has_gt = dataset.ground_truth().is_some();
    let eval_mode = match config.mode {
        Mode::Exact => EvaluationMode::Exact,
        // Blind estimates are the headline, but exact references are cheap
        // and make the MSE(blind vs exact) summary column possible.
        Mode::Blind => EvaluationMode::Both,
    };

    let outcomes: Vec<(SchemeSpec, CellOutcome)> = config
        .schemes
        .par_iter()
        .enumerate()
        .map(|(cell_idx, cell)| {
            let scheme = cell.resolve(n);
            let mut options = EvalOptions::new(eval_mode);
            if config.ensemble {
                options = options.with_ensemble();
            }
            let outcome = match evaluate_resilience(
                dataset,
                &config.detectors,
                scheme,
                config.replicates,
                &options,
                substream(config.master_seed, "cell", cell_idx as u64),
            ) {
                Ok(report) => CellOutcome::Ran(Box::new(report)),
                Err(err) => CellOutcome::Skipped(err.to_string()),
            };
            (scheme, outcome)
        })
        .collect();

    let per_method_grid = config.detectors.len() + usize::from(config.ensemble);
    let grid_size = config.schemes.len() * per_method_grid;

    let mut replicates = Table::new([
        "dataset",
        "method",
        "scheme",
        "replicate",
        "part",
        "sample_size",
        "rho_exact",
        "rho_blind",
        "alpha_hat",
        "beta_hat",
        "alpha_true",
        "beta_true",
    ]);
    let mut summary_columns = vec![
        "dataset".to_string(),
        "method".to_string(),
        "scheme".to_string(),
        "replicates".to_string(),
        "n_samples".to_string(),
        "sample_size".to_string(),
        "mean_rho".to_string(),
    ];
    if config.replicates > 1 {
        summary_columns.push("sd_rho".to_string());
    }
    summary_columns.extend([
        "mse_blind_vs_exact".to_string(),
        "rmse_alpha".to_string(),
        "rmse_beta".to_string(),
    ]);
    let mut summary = Table::new(summary_columns);
    let mut skipped = Table::new(["dataset", "method", "scheme", "reason"]);

    for (scheme, outcome) in &outcomes {
        match outcome {
            CellOutcome::Skipped(reason) => {
                for cfg in &config.detectors {
                    skipped.push(vec![
                        dataset.id().to_string(),
                        cfg.method.name().to_string(),
                        scheme.to_string(),
                        reason.clone(),
                    ]);
                }
                if config.ensemble {
                    skipped.push(vec![
                        dataset.id().to_string(),
                        "ensemble".to_string(),
                        scheme.to_string(),
                        reason.clone(),
                    ]);
                }
            }
            CellOutcome::Ran(report) => {
                append_cell_rows(config, dataset, scheme, report, &mut replicates, &mut summary)?;
            }
        }
    }

    let quality = has_gt
        .then(|| quality_table(config, dataset, &outcomes))
        .transpose()?;

    Ok(ExperimentResults {
        replicates,
        summary,
        skipped,
        quality,
        grid_size,
    })
}

/// Emits the per-sample and summary rows of one successfully evaluated cell.
fn append_cell_rows(
    config: &ExperimentConfig,
    dataset: &Dataset<f64>,
    scheme: &SchemeSpec,
    report: &ResilienceReport<f64>,
    replicates: &mut Table,
    summary: &mut Table,
) -> Result<()> {
    let headline = match config.mode {
        Mode::Exact => EstimateMode::Exact,
        Mode::Blind => EstimateMode::Blind,
    };

    // Column views per method: exact, blind, EM panels, ground-truth panels.
    struct MethodView {
        name: String,
        exact: Option<Vec<f64>>,
        blind: Option<Vec<f64>>,
        panels: Option<Vec<RatePanel<f64>>>,
        true_panels: Option<Vec<Option<RatePanel<f64>>>>,
    }

    let mut views: Vec<MethodView> = Vec::new();
    for (m, name) in report.methods.iter().enumerate() {
        views.push(MethodView {
            name: name.clone(),
            exact: report
                .exact
                .as_ref()
                .map(|rows| rows.iter().map(|r| r[m]).collect()),
            blind: report
                .blind
                .as_ref()
                .map(|b| b.rho.iter().map(|r| r[m]).collect()),
            panels: report
                .blind
                .as_ref()
                .map(|b| b.sample_panels.iter().map(|r| r[m]).collect()),
            true_panels: report
                .true_panels
                .as_ref()
                .map(|rows| rows.iter().map(|r| r[m]).collect()),
        });
    }
    if config.ensemble {
        views.push(MethodView {
            name: "ensemble".to_string(),
            exact: report.ensemble_exact.clone(),
            blind: report.blind.as_ref().and_then(|b| b.ensemble_rho.clone()),
            panels: report
                .blind
                .as_ref()
                .and_then(|b| b.ensemble_sample_panels.clone()),
            true_panels: None,
        });
    }

    for view in &views {
        for (s, info) in report.samples.iter().enumerate() {
            let true_panel = view.true_panels.as_ref().and_then(|tp| tp[s]);
            replicates.push(vec![
                dataset.id().to_string(),
                view.name.clone(),
                scheme.to_string(),
                info.replicate.to_string(),
                info.part.to_string(),
                info.size.to_string(),
                opt(view.exact.as_ref().map(|v| v[s])),
                opt(view.blind.as_ref().map(|v| v[s])),
                opt(view.panels.as_ref().map(|p| p[s].alpha)),
                opt(view.panels.as_ref().map(|p| p[s].beta)),
                opt(true_panel.map(|p| p.alpha)),
                opt(true_panel.map(|p| p.beta)),
            ]);
        }

        let values = match headline {
            EstimateMode::Exact => view.exact.as_ref(),
            EstimateMode::Blind => view.blind.as_ref(),
        }
        .ok_or_else(|| Error::Config(format!("no {headline} values for {}", view.name)))?;
        let mean = stats::mean(values);
        let sd = (values.len() >= 2).then(|| stats::sample_sd(values));

        let mse = match (&view.blind, &view.exact) {
            (Some(blind), Some(exact)) if config.mode == Mode::Blind => Some(
                stats::mean(
                    &blind
                        .iter()
                        .zip(exact)
                        .map(|(b, e)| (b - e) * (b - e))
                        .collect::<Vec<_>>(),
                ),
            ),
            _ => None,
        };
        let (rmse_alpha, rmse_beta) = match (&view.panels, &view.true_panels) {
            (Some(panels), Some(true_panels)) => {
                let mut sq_a = Vec::new();
                let mut sq_b = Vec::new();
                for (est, truth) in panels.iter().zip(true_panels) {
                    if let Some(truth) = truth {
                        sq_a.push((est.alpha - truth.alpha).powi(2));
                        sq_b.push((est.beta - truth.beta).powi(2));
                    }
                }
                if sq_a.is_empty() {
                    (None, None)
                } else {
                    (
                        Some(stats::mean(&sq_a).sqrt()),
                        Some(stats::mean(&sq_b).sqrt()),
                    )
                }
            }
            _ => (None, None),
        };

        let mut row = vec![
            dataset.id().to_string(),
            view.name.clone(),
            scheme.to_string(),
            config.replicates.to_string(),
            report.samples.len().to_string(),
            report.samples.first().map_or(0, |s| s.size).to_string(),
            mean.to_string(),
        ];
        if config.replicates > 1 {
            row.push(opt(sd));
        }
        row.push(opt(mse));
        row.push(opt(rmse_alpha));
        row.push(opt(rmse_beta));
        summary.push(row);
    }
    Ok(())
}

/// Whole-dataset quality (precision/recall/F1 against ground truth) next to
/// the mean resilience of each configured method under each scheme.
fn quality_table(
    config: &ExperimentConfig,
    dataset: &Dataset<f64>,
    outcomes: &[(SchemeSpec, CellOutcome)],
) -> Result<Table> {
    let truth = dataset
        .ground_truth()
        .expect("caller checked ground truth exists");
    let headline = match config.mode {
        Mode::Exact => EstimateMode::Exact,
        Mode::Blind => EstimateMode::Blind,
    };

    // One whole-dataset run per method; the EM consensus over those runs
    // doubles as the ensemble's quality row.
    let whole_runs: Vec<DetectionResult> = config
        .detectors
        .iter()
        .enumerate()
        .map(|(m, cfg)| {
            run_detector(
                dataset,
                cfg,
                None,
                substream(config.master_seed, "quality", m as u64),
            )
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<(String, Vec<bool>)> = whole_runs
        .iter()
        .map(|r| (r.method().to_string(), r.record_flags().to_vec()))
        .collect();
    if config.ensemble {
        let votes = LabelMatrix::from_results(&whole_runs)?;
        let model = em_fit::<f64>(&votes, &EmOptions::default());
        rows.push(("ensemble".to_string(), model.labels().to_vec()));
    }

    let mut table = Table::new([
        "dataset",
        "method",
        "scheme",
        "precision",
        "recall",
        "f1",
        "mean_rho",
    ]);
    for (name, flags) in &rows {
        let quality: outlier_resilience::Rates<f64> = rates(&confusion(flags, truth)?);
        for (scheme, outcome) in outcomes {
            let CellOutcome::Ran(report) = outcome else {
                continue;
            };
            let mean_rho = if name == "ensemble" {
                report.ensemble_values(headline).map(|v| stats::mean(&v))
            } else {
                report
                    .methods
                    .iter()
                    .position(|m| m == name)
                    .ok_or_else(|| Error::Config(format!("method {name} missing from report")))
                    .and_then(|m| report.method_values(m, headline).map(|v| stats::mean(&v)))
            }?;
            table.push(vec![
                dataset.id().to_string(),
                name.clone(),
                scheme.to_string(),
                opt(quality.precision),
                opt(quality.recall),
                opt(quality.f1),
                mean_rho.to_string(),
            ]);
        }
    }
    Ok(table)
}

/// Writes every results file into the output directory.
pub fn write_results(
    config: &ExperimentConfig,
    results: &ExperimentResults,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let provenance = Provenance::new(config.canonical(), config.master_seed);
    std::fs::write(out_dir.join("config.txt"), provenance.config.as_bytes())?;
    results
        .replicates
        .write_file(&out_dir.join("replicates.csv"), &provenance)?;
    results
        .summary
        .write_file(&out_dir.join("summary.csv"), &provenance)?;
    results
        .skipped
        .write_file(&out_dir.join("skipped.csv"), &provenance)?;
    if let Some(quality) = &results.quality {
        quality.write_file(&out_dir.join("quality.csv"), &provenance)?;
    }
    debug_assert_eq!(
        results.summary.n_rows() + results.skipped.n_rows(),
        results.grid_size,
        "summary and skipped rows must account for the whole grid"
    );
    Ok(())
}
