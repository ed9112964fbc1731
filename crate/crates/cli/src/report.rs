//! The report command: re-reads results directories, recomputes every
//! summary statistic from the stored replicate rows, verifies the stored
//! summaries against the recomputation, and emits tidy plot-ready tables.
//!
//! Output files (written only when their inputs exist):
//!   - `resilience_by_scheme.csv`     — mean/sd resilience per
//!     (dataset, method, scheme), recomputed from replicate rows.
//!   - `quality_vs_resilience.csv`    — whole-dataset quality metrics joined
//!     with mean resilience, passed through from `quality.csv`.
//!   - `ensemble_vs_components.csv`   — component methods next to the
//!     ensemble consensus and the median component, per (dataset, scheme).

use std::collections::BTreeMap;
use std::path::Path;

use outlier_resilience::{stats, Error, Result};

use crate::output::{opt, Provenance, Table};

/// One parsed CSV file: named columns, string cells.
struct Sheet {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Sheet {
    fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(std::io::BufReader::new(file));
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in rdr.records() {
            rows.push(record?.iter().map(str::to_string).collect());
        }
        Ok(Sheet { columns, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn require(&self, name: &str, path: &Path) -> Result<usize> {
        self.col(name).ok_or_else(|| {
            Error::Parse {
                row: 0,
                column: name.to_string(),
                reason: format!("column missing from {}", path.display()),
            }
        })
    }
}

/// Key identifying one summary cell.
type CellKey = (String, String, String); // dataset, method, scheme

/// Recomputed statistics of one cell.
struct CellStats {
    n_samples: usize,
    sample_size: usize,
    mean_exact: Option<f64>,
    mean_blind: Option<f64>,
    sd_exact: Option<f64>,
    sd_blind: Option<f64>,
    mse_blind_vs_exact: Option<f64>,
    rmse_alpha: Option<f64>,
    rmse_beta: Option<f64>,
}

fn parse_cell(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

/// Groups replicate rows by cell and recomputes every summary statistic.
fn recompute(replicates: &Sheet, path: &Path) -> Result<BTreeMap<CellKey, CellStats>> {
    let dataset = replicates.require("dataset", path)?;
    let method = replicates.require("method", path)?;
    let scheme = replicates.require("scheme", path)?;
    let size = replicates.require("sample_size", path)?;
    let rho_exact = replicates.require("rho_exact", path)?;
    let rho_blind = replicates.require("rho_blind", path)?;
    let alpha_hat = replicates.require("alpha_hat", path)?;
    let beta_hat = replicates.require("beta_hat", path)?;
    let alpha_true = replicates.require("alpha_true", path)?;
    let beta_true = replicates.require("beta_true", path)?;

    let mut grouped: BTreeMap<CellKey, Vec<&Vec<String>>> = BTreeMap::new();
    for row in &replicates.rows {
        grouped
            .entry((row[dataset].clone(), row[method].clone(), row[scheme].clone()))
            .or_default()
            .push(row);
    }

    let mut out = BTreeMap::new();
    for (key, rows) in grouped {
        let exact: Vec<f64> = rows.iter().filter_map(|r| parse_cell(&r[rho_exact])).collect();
        let blind: Vec<f64> = rows.iter().filter_map(|r| parse_cell(&r[rho_blind])).collect();
        let mse = (exact.len() == rows.len() && blind.len() == rows.len() && !rows.is_empty())
            .then(|| {
                stats::mean(
                    &blind
                        .iter()
                        .zip(&exact)
                        .map(|(b, e)| (b - e) * (b - e))
                        .collect::<Vec<_>>(),
                )
            });
        let mut sq_a = Vec::new();
        let mut sq_b = Vec::new();
        for r in &rows {
            if let (Some(est_a), Some(true_a), Some(est_b), Some(true_b)) = (
                parse_cell(&r[alpha_hat]),
                parse_cell(&r[alpha_true]),
                parse_cell(&r[beta_hat]),
                parse_cell(&r[beta_true]),
            ) {
                sq_a.push((est_a - true_a).powi(2));
                sq_b.push((est_b - true_b).powi(2));
            }
        }
        let summarize = |v: &[f64]| {
            (
                (!v.is_empty()).then(|| stats::mean(v)),
                (v.len() >= 2).then(|| stats::sample_sd(v)),
            )
        };
        let (mean_exact, sd_exact) = summarize(&exact);
        let (mean_blind, sd_blind) = summarize(&blind);
        out.insert(
            key,
            CellStats {
                n_samples: rows.len(),
                sample_size: rows
                    .first()
                    .and_then(|r| r[size].parse().ok())
                    .unwrap_or(0),
                mean_exact,
                mean_blind,
                sd_exact,
                sd_blind,
                mse_blind_vs_exact: mse,
                rmse_alpha: (!sq_a.is_empty()).then(|| stats::mean(&sq_a).sqrt()),
                rmse_beta: (!sq_b.is_empty()).then(|| stats::mean(&sq_b).sqrt()),
            },
        );
    }
    Ok(out)
}

/// Verifies one stored summary sheet against the recomputed statistics.
fn verify_summary(
    summary: &Sheet,
    cells: &BTreeMap<CellKey, CellStats>,
    path: &Path,
) -> Result<()> {
    let dataset = summary.require("dataset", path)?;
    let method = summary.require("method", path)?;
    let scheme = summary.require("scheme", path)?;
    let mean_rho = summary.require("mean_rho", path)?;
    let sd_rho = summary.col("sd_rho");
    let mse = summary.col("mse_blind_vs_exact");
    let rmse_alpha = summary.col("rmse_alpha");
    let rmse_beta = summary.col("rmse_beta");

    let mismatch = |row: usize, key: &CellKey, what: &str, stored: f64, computed: f64| {
        Error::Parse {
            row,
            column: what.to_string(),
            reason: format!(
                "stored {what} {stored} for ({}, {}, {}) does not recompute from replicate \
                 rows (got {computed})",
                key.0, key.1, key.2
            ),
        }
    };

    for (row_no, row) in summary.rows.iter().enumerate() {
        let key: CellKey = (
            row[dataset].clone(),
            row[method].clone(),
            row[scheme].clone(),
        );
        let cell = cells.get(&key).ok_or_else(|| Error::Config(format!(
            "summary row ({}, {}, {}) has no replicate rows",
            key.0, key.1, key.2
        )))?;
        // The stored headline mean must match either mode's recomputation;
        // which one depends on the experiment's mode, which the summary file
        // does not repeat, so accept the one that matches and reject rows
        // matching neither.
        let stored_mean: f64 = row[mean_rho]
            .parse()
            .map_err(|_| Error::Config(format!("unparseable mean_rho {:?}", row[mean_rho])))?;
        let close = |a: f64, b: Option<f64>| b.is_some_and(|b| (a - b).abs() <= 1e-12);
        if !close(stored_mean, cell.mean_exact) && !close(stored_mean, cell.mean_blind) {
            return Err(mismatch(
                row_no + 1,
                &key,
                "mean_rho",
                stored_mean,
                cell.mean_exact.or(cell.mean_blind).unwrap_or(f64::NAN),
            ));
        }
        // (column, name, recomputed primary value, accepted alternate)
        type Check<'a> = (Option<usize>, &'a str, Option<f64>, Option<f64>);
        let checks: [Check; 4] = [
            (sd_rho, "sd_rho", cell.sd_exact, cell.sd_blind),
            (mse, "mse_blind_vs_exact", cell.mse_blind_vs_exact, None),
            (rmse_alpha, "rmse_alpha", cell.rmse_alpha, None),
            (rmse_beta, "rmse_beta", cell.rmse_beta, None),
        ];
        for (col, what, primary, alternate) in checks {
            let Some(col) = col else { continue };
            let Some(stored) = parse_cell(&row[col]) else {
                continue;
            };
            if !close(stored, primary) && !close(stored, alternate) {
                return Err(mismatch(
                    row_no + 1,
                    &key,
                    what,
                    stored,
                    primary.or(alternate).unwrap_or(f64::NAN),
                ));
            }
        }
    }
    Ok(())
}

/// Runs the report over one or more results directories.
pub fn run(results_dirs: &[&Path], out_dir: &Path) -> Result<()> {
    let mut all_cells: BTreeMap<CellKey, CellStats> = BTreeMap::new();
    let mut quality_rows: Vec<Vec<String>> = Vec::new();
    let mut found_any = false;

    for dir in results_dirs {
        let replicates_path = dir.join("replicates.csv");
        if !replicates_path.exists() {
            continue;
        }
        found_any = true;
        let replicates = Sheet::read(&replicates_path)?;
        let cells = recompute(&replicates, &replicates_path)?;

        let summary_path = dir.join("summary.csv");
        if summary_path.exists() {
            let summary = Sheet::read(&summary_path)?;
            verify_summary(&summary, &cells, &summary_path)?;
        }

        for (key, stats) in cells {
            if all_cells.insert(key.clone(), stats).is_some() {
                return Err(Error::Config(format!(
                    "duplicate cell ({}, {}, {}) across results directories",
                    key.0, key.1, key.2
                )));
            }
        }

        let quality_path = dir.join("quality.csv");
        if quality_path.exists() {
            let quality = Sheet::read(&quality_path)?;
            for want in ["dataset", "method", "scheme", "precision", "recall", "f1"] {
                quality.require(want, &quality_path)?;
            }
            let idx: Vec<usize> = ["dataset", "method", "scheme", "precision", "recall", "f1"]
                .iter()
                .map(|c| quality.col(c).expect("checked above"))
                .collect();
            for row in &quality.rows {
                quality_rows.push(idx.iter().map(|&i| row[i].clone()).collect());
            }
        }
    }

    if !found_any {
        return Err(Error::Config(format!(
            "no replicates.csv found under {}",
            results_dirs
                .iter()
                .map(|d| d.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }

    std::fs::create_dir_all(out_dir)?;
    let provenance = Provenance::new(
        format!(
            "report.inputs = {}\n",
            results_dirs
                .iter()
                .map(|d| d.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        0,
    );

    // Family 1: resilience by (dataset, method, scheme), recomputed.
    let mut by_scheme = Table::new([
        "dataset",
        "method",
        "scheme",
        "n_samples",
        "sample_size",
        "mean_rho_exact",
        "sd_rho_exact",
        "mean_rho_blind",
        "sd_rho_blind",
        "mse_blind_vs_exact",
        "rmse_alpha",
        "rmse_beta",
    ]);
    for ((dataset, method, scheme), cell) in &all_cells {
        by_scheme.push(vec![
            dataset.clone(),
            method.clone(),
            scheme.clone(),
            cell.n_samples.to_string(),
            cell.sample_size.to_string(),
            opt(cell.mean_exact),
            opt(cell.sd_exact),
            opt(cell.mean_blind),
            opt(cell.sd_blind),
            opt(cell.mse_blind_vs_exact),
            opt(cell.rmse_alpha),
            opt(cell.rmse_beta),
        ]);
    }
    by_scheme.write_file(&out_dir.join("resilience_by_scheme.csv"), &provenance)?;

    // Family 2: quality vs resilience, passed through when present.
    if !quality_rows.is_empty() {
        let mut joint = Table::new([
            "dataset",
            "method",
            "scheme",
            "precision",
            "recall",
            "f1",
            "mean_rho",
        ]);
        quality_rows.sort();
        for row in quality_rows {
            let key = (row[0].clone(), row[1].clone(), row[2].clone());
            let mean_rho = all_cells
                .get(&key)
                .and_then(|c| c.mean_exact.or(c.mean_blind));
            let mut row = row;
            row.push(opt(mean_rho));
            joint.push(row);
        }
        joint.write_file(&out_dir.join("quality_vs_resilience.csv"), &provenance)?;
    }

    // Family 3: ensemble vs component methods, when ensemble rows exist.
    let has_ensemble = all_cells.keys().any(|(_, m, _)| m == "ensemble");
    if has_ensemble {
        let mut table = Table::new([
            "dataset",
            "scheme",
            "method",
            "mean_rho",
            "ensemble_mean_rho",
            "median_component_mean_rho",
        ]);
        // Group cells per (dataset, scheme).
        let mut groups: BTreeMap<(String, String), Vec<(&str, &CellStats)>> = BTreeMap::new();
        for ((dataset, method, scheme), cell) in &all_cells {
            groups
                .entry((dataset.clone(), scheme.clone()))
                .or_default()
                .push((method, cell));
        }
        for ((dataset, scheme), members) in groups {
            let headline = |c: &CellStats| c.mean_blind.or(c.mean_exact);
            let ensemble_mean = members
                .iter()
                .find(|(m, _)| *m == "ensemble")
                .and_then(|(_, c)| headline(c));
            let component_means: Vec<f64> = members
                .iter()
                .filter(|(m, _)| *m != "ensemble")
                .filter_map(|(_, c)| headline(c))
                .collect();
            if ensemble_mean.is_none() || component_means.is_empty() {
                continue;
            }
            let median = stats::median(&component_means);
            for (method, cell) in members.iter().filter(|(m, _)| *m != "ensemble") {
                table.push(vec![
                    dataset.clone(),
                    scheme.clone(),
                    (*method).to_string(),
                    opt(headline(cell)),
                    opt(ensemble_mean),
                    median.to_string(),
                ]);
            }
        }
        table.write_file(&out_dir.join("ensemble_vs_components.csv"), &provenance)?;
    }

    Ok(())
}
