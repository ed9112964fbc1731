//! End-to-end tests of the `resil` binary: every subcommand, the exit-code
//! contract, and the determinism and accounting invariants of experiment
//! runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn resil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resil"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Parses the data rows of one of our CSVs: skips `#` comments, returns
/// (header fields, rows of fields). Quoted fields keep internal commas.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rdr
        .headers()
        .expect("header")
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.expect("row").iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let idx = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    rows.iter().map(|r| r[idx].as_str()).collect()
}

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().expect("tempdir"))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[test]
fn generate_writes_loadable_provenance_stamped_csv() {
    let dir = Dir::new();
    let out = resil(&[
        "generate", "--n", "200", "--dist", "dist2", "--rate", "0.1", "--seed", "7", "--out",
        &dir.arg("data.csv"),
    ]);
    assert_success(&out);
    let text = read(&dir.path("data.csv"));
    assert!(text.starts_with("# tool: resil "));
    assert!(text.contains("# config_hash: "));
    assert!(text.contains("# master_seed: 7"));
    let (header, rows) = parse_csv(&text);
    assert_eq!(header.last().map(String::as_str), Some("is_outlier"));
    assert_eq!(rows.len(), 200);
    let outliers = column(&header, &rows, "is_outlier")
        .iter()
        .filter(|&&v| v == "1")
        .count();
    assert_eq!(outliers, 20, "rate 0.1 of 200 records");
}

#[test]
fn generate_is_deterministic_and_seed_sensitive() {
    let dir = Dir::new();
    for (name, seed) in [("a.csv", "3"), ("b.csv", "3"), ("c.csv", "4")] {
        let out = resil(&["generate", "--seed", seed, "--out", &dir.arg(name)]);
        assert_success(&out);
    }
    assert_eq!(read(&dir.path("a.csv")), read(&dir.path("b.csv")));
    assert_ne!(read(&dir.path("a.csv")), read(&dir.path("c.csv")));
}

#[test]
fn generate_fig1_has_no_ground_truth() {
    let dir = Dir::new();
    let out = resil(&["generate", "--dist", "fig1", "--seed", "1", "--out", &dir.arg("f.csv")]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("f.csv")));
    assert!(!header.iter().any(|h| h == "is_outlier"));
    assert_eq!(rows.len(), 1500);
}

#[test]
fn generate_rejects_rate_of_one_as_usage_error() {
    let dir = Dir::new();
    let out = resil(&["generate", "--rate", "1.0", "--out", &dir.arg("x.csv")]);
    assert_exit(&out, 2);
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

/// A small CSV with one constant column and no ground truth.
fn write_constant_csv(path: &Path) {
    let mut text = String::from("x,y\n");
    for i in 0..50 {
        text.push_str(&format!("{}.5,4.0\n", i % 7));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn detect_three_sigma_flags_nothing_on_constant_column() {
    let dir = Dir::new();
    write_constant_csv(&dir.path("flat.csv"));
    let out = resil(&[
        "detect", "--data", &dir.arg("flat.csv"), "--method", "three_sigma", "--out",
        &dir.arg("det.csv"),
    ]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("det.csv")));
    assert_eq!(rows.len(), 50);
    assert!(column(&header, &rows, "flag").iter().all(|&f| f == "0"));
}

#[test]
fn detect_mahalanobis_flags_exactly_the_top_fraction() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "100", "--seed", "2", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    let out = resil(&[
        "detect", "--data", &dir.arg("d.csv"), "--method", "mahalanobis", "--out",
        &dir.arg("det.csv"),
    ]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("det.csv")));
    let flagged = column(&header, &rows, "flag").iter().filter(|&&f| f == "1").count();
    assert_eq!(flagged, 10, "default top fraction 0.1 on N=100");
}

#[test]
fn detect_unknown_method_is_usage_error_listing_methods() {
    let dir = Dir::new();
    write_constant_csv(&dir.path("flat.csv"));
    let out = resil(&[
        "detect", "--data", &dir.arg("flat.csv"), "--method", "zscore", "--out", &dir.arg("x.csv"),
    ]);
    assert_exit(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    for name in ["three_sigma", "boxplot", "chi_square", "mad", "mahalanobis", "kmeans", "lof"] {
        assert!(stderr.contains(name), "stderr must list {name}: {stderr}");
    }
}

#[test]
fn detect_missing_file_is_data_error() {
    let dir = Dir::new();
    let out = resil(&[
        "detect", "--data", &dir.arg("nope.csv"), "--method", "mad", "--out", &dir.arg("x.csv"),
    ]);
    assert_exit(&out, 3);
}

#[test]
fn detect_on_sample_covers_only_sampled_rows() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "80", "--seed", "5", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    let sample = resil(&[
        "sample", "--data", &dir.arg("d.csv"), "--scheme", "random(size=20)", "--seed", "9",
        "--out", &dir.arg("s.csv"),
    ]);
    assert_success(&sample);
    let out = resil(&[
        "detect", "--data", &dir.arg("d.csv"), "--method", "boxplot", "--sample",
        &dir.arg("s.csv"), "--out", &dir.arg("det.csv"),
    ]);
    assert_success(&out);
    let (_, rows) = parse_csv(&read(&dir.path("det.csv")));
    assert_eq!(rows.len(), 20);
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[test]
fn sample_supports_every_scheme_and_is_deterministic() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "60", "--seed", "1", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    for (name, scheme) in [
        ("r.csv", "random(size=15)"),
        ("b.csv", "block(n_blocks=3,block_size=5)"),
        ("p.csv", "partition(k=4,part=2)"),
    ] {
        let out = resil(&[
            "sample", "--data", &dir.arg("d.csv"), "--scheme", scheme, "--seed", "3", "--out",
            &dir.arg(name),
        ]);
        assert_success(&out);
        let again = format!("again-{name}");
        let out = resil(&[
            "sample", "--data", &dir.arg("d.csv"), "--scheme", scheme, "--seed", "3", "--out",
            &dir.arg(&again),
        ]);
        assert_success(&out);
        assert_eq!(read(&dir.path(name)), read(&dir.path(&again)));
    }
    let (_, rows) = parse_csv(&read(&dir.path("r.csv")));
    assert_eq!(rows.len(), 15);
    let (_, rows) = parse_csv(&read(&dir.path("p.csv")));
    assert_eq!(rows.len(), 15, "part of a 4-way partition of 60");
}

#[test]
fn sample_rejects_out_of_range_part() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "60", "--seed", "1", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    let out = resil(&[
        "sample", "--data", &dir.arg("d.csv"), "--scheme", "partition(k=4,part=4)", "--seed", "3",
        "--out", &dir.arg("x.csv"),
    ]);
    assert_exit(&out, 2);
}

// ---------------------------------------------------------------------------
// resilience and ensemble
// ---------------------------------------------------------------------------

#[test]
fn resilience_reports_one_row_per_method() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "300", "--seed", "4", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    let out = resil(&[
        "resilience", "--data", &dir.arg("d.csv"), "--methods", "three_sigma, boxplot",
        "--scheme", "random(pct=10)", "--replicates", "5", "--seed", "6", "--out",
        &dir.arg("res.csv"),
    ]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("res.csv")));
    assert_eq!(rows.len(), 2);
    assert_eq!(column(&header, &rows, "method"), vec!["three_sigma", "boxplot"]);
    assert_eq!(column(&header, &rows, "sample_size"), vec!["30", "30"]);
    for mean in column(&header, &rows, "mean_rho") {
        let v: f64 = mean.parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn ensemble_adds_consensus_row_and_model_report() {
    let dir = Dir::new();
    let gen = resil(&["generate", "--n", "300", "--seed", "4", "--out", &dir.arg("d.csv")]);
    assert_success(&gen);
    let out = resil(&[
        "ensemble", "--data", &dir.arg("d.csv"), "--scheme", "random(pct=10)", "--replicates",
        "5", "--seed", "6", "--out", &dir.arg("ens.csv"), "--model-report", &dir.arg("model.txt"),
    ]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("ens.csv")));
    assert_eq!(rows.len(), 8, "seven methods plus the consensus");
    assert_eq!(column(&header, &rows, "method").last().copied(), Some("ensemble"));
    let model = read(&dir.path("model.txt"));
    assert!(model.contains("three_sigma"), "model report names methods: {model}");
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn write_config(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

const BLIND_CONFIG: &str = "\
experiment.name = smoke
dataset.kind = synth
dataset.n = 200
dataset.dist = dist1
dataset.rate = 0.05
detectors = three_sigma, boxplot
schemes = random(pct=10), partition(k=5)
replicates = 3
master_seed = 11
mode = blind
ensemble = true
";

#[test]
fn experiment_writes_consistent_tables() {
    let dir = Dir::new();
    write_config(&dir.path("exp.conf"), BLIND_CONFIG);
    let out = resil(&[
        "experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg("results"),
    ]);
    assert_success(&out);

    let (sum_header, sum_rows) = parse_csv(&read(&dir.path("results/summary.csv")));
    let (_, skip_rows) = parse_csv(&read(&dir.path("results/skipped.csv")));
    // Grid: 2 schemes x (2 methods + ensemble).
    assert_eq!(sum_rows.len() + skip_rows.len(), 6);
    assert_eq!(skip_rows.len(), 0);

    let (rep_header, rep_rows) = parse_csv(&read(&dir.path("results/replicates.csv")));
    // Per run: 3 random samples + 3 partition draws x 5 parts = 18 rows each
    // for three_sigma, boxplot, and the ensemble.
    assert_eq!(rep_rows.len(), 3 * 18);

    // Summary means recompute exactly from the replicate rows.
    let methods = column(&rep_header, &rep_rows, "method");
    let schemes = column(&rep_header, &rep_rows, "scheme");
    let blind: Vec<&str> = column(&rep_header, &rep_rows, "rho_blind");
    for row in &sum_rows {
        let method = &row[sum_header.iter().position(|h| h == "method").unwrap()];
        let scheme = &row[sum_header.iter().position(|h| h == "scheme").unwrap()];
        let mean: f64 = row[sum_header.iter().position(|h| h == "mean_rho").unwrap()]
            .parse()
            .unwrap();
        let values: Vec<f64> = methods
            .iter()
            .zip(&schemes)
            .zip(&blind)
            .filter(|((m, s), _)| *m == method && **s == scheme)
            .map(|(_, v)| v.parse().unwrap())
            .collect();
        assert!(!values.is_empty());
        let recomputed = values.iter().sum::<f64>() / values.len() as f64;
        assert!(
            (mean - recomputed).abs() <= 1e-12,
            "{method}/{scheme}: stored {mean}, recomputed {recomputed}"
        );
    }

    // Blind mode fills the estimation columns and their summary statistics.
    for col in ["mse_blind_vs_exact", "rmse_alpha", "rmse_beta"] {
        assert!(sum_header.iter().any(|h| h == col));
    }
    let rmse_alpha = column(&sum_header, &sum_rows, "rmse_alpha");
    let by_method = column(&sum_header, &sum_rows, "method");
    for (method, rmse) in by_method.iter().zip(&rmse_alpha) {
        if *method == "ensemble" {
            assert!(rmse.is_empty(), "no ground-truth panel for the consensus");
        } else {
            assert!(!rmse.is_empty(), "{method} must carry rmse_alpha");
        }
    }

    // Ground truth exists, so the quality table is produced.
    let (q_header, q_rows) = parse_csv(&read(&dir.path("results/quality.csv")));
    assert_eq!(q_rows.len(), 6, "3 flag sources x 2 schemes");
    for f1 in column(&q_header, &q_rows, "f1") {
        let v: f64 = f1.parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn experiment_reruns_byte_identically() {
    let dir = Dir::new();
    write_config(&dir.path("exp.conf"), BLIND_CONFIG);
    for out_dir in ["one", "two"] {
        let out = resil(&["experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg(out_dir)]);
        assert_success(&out);
    }
    for file in ["replicates.csv", "summary.csv", "skipped.csv", "quality.csv", "config.txt"] {
        assert_eq!(
            read(&dir.path(&format!("one/{file}"))),
            read(&dir.path(&format!("two/{file}"))),
            "{file} must not depend on anything but config and seed"
        );
    }
    // A different master seed must change the replicate draws.
    let out = resil(&[
        "experiment", "--config", &dir.arg("exp.conf"), "--seed", "12", "--out", &dir.arg("three"),
    ]);
    assert_success(&out);
    assert_ne!(read(&dir.path("one/replicates.csv")), read(&dir.path("three/replicates.csv")));
}

#[test]
fn experiment_with_one_replicate_drops_sd_column() {
    let dir = Dir::new();
    write_config(
        &dir.path("exp.conf"),
        "dataset.kind = synth\ndataset.n = 150\ndataset.dist = dist1\ndataset.rate = 0.05\n\
         detectors = three_sigma\nschemes = random(size=30)\nreplicates = 1\nmode = exact\n",
    );
    let out = resil(&["experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg("results")]);
    assert_success(&out);
    let (header, rows) = parse_csv(&read(&dir.path("results/summary.csv")));
    assert!(!header.iter().any(|h| h == "sd_rho"), "{header:?}");
    assert_eq!(rows.len(), 1);
}

#[test]
fn experiment_records_infeasible_cells_as_skipped() {
    let dir = Dir::new();
    write_config(
        &dir.path("exp.conf"),
        "dataset.kind = synth\ndataset.n = 100\ndataset.dist = dist1\ndataset.rate = 0.05\n\
         detectors = three_sigma, lof\nschemes = random(size=40), random(size=5)\n\
         replicates = 2\nmode = exact\n",
    );
    let out = resil(&["experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg("results")]);
    assert_success(&out);
    let (_, sum_rows) = parse_csv(&read(&dir.path("results/summary.csv")));
    let (skip_header, skip_rows) = parse_csv(&read(&dir.path("results/skipped.csv")));
    // random(size=5) cannot run lof (min_pts 10 needs more records), so that
    // cell skips for both methods while random(size=40) runs.
    assert_eq!(sum_rows.len(), 2);
    assert_eq!(skip_rows.len(), 2);
    assert_eq!(sum_rows.len() + skip_rows.len(), 4, "grid accounting");
    for reason in column(&skip_header, &skip_rows, "reason") {
        assert!(!reason.is_empty());
    }
}

#[test]
fn experiment_rejects_bad_configs_as_usage_errors() {
    let dir = Dir::new();
    write_config(&dir.path("bad.conf"), "dataset.kind = synth\n");
    let out = resil(&["experiment", "--config", &dir.arg("bad.conf"), "--out", &dir.arg("r")]);
    assert_exit(&out, 2);
    let missing = resil(&["experiment", "--config", &dir.arg("absent.conf"), "--out", &dir.arg("r")]);
    assert_exit(&missing, 3);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[test]
fn report_aggregates_and_verifies_experiment_results() {
    let dir = Dir::new();
    write_config(&dir.path("exp.conf"), BLIND_CONFIG);
    let out = resil(&["experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg("results")]);
    assert_success(&out);
    let out = resil(&["report", "--results", &dir.arg("results"), "--out", &dir.arg("tables")]);
    assert_success(&out);

    let (header, rows) = parse_csv(&read(&dir.path("tables/resilience_by_scheme.csv")));
    assert_eq!(rows.len(), 6);
    for mean in column(&header, &rows, "mean_rho_blind") {
        assert!(!mean.is_empty());
    }

    let (_, joint_rows) = parse_csv(&read(&dir.path("tables/quality_vs_resilience.csv")));
    assert_eq!(joint_rows.len(), 6);

    let (e_header, e_rows) = parse_csv(&read(&dir.path("tables/ensemble_vs_components.csv")));
    assert_eq!(e_rows.len(), 4, "two component methods x two schemes");
    for v in column(&e_header, &e_rows, "ensemble_mean_rho") {
        assert!(!v.is_empty());
    }
}

#[test]
fn report_rejects_tampered_summaries() {
    let dir = Dir::new();
    write_config(&dir.path("exp.conf"), BLIND_CONFIG);
    let out = resil(&["experiment", "--config", &dir.arg("exp.conf"), "--out", &dir.arg("results")]);
    assert_success(&out);
    let summary_path = dir.path("results/summary.csv");
    let text = read(&summary_path);
    let mut lines: Vec<&str> = text.lines().collect();
    let header_idx = lines
        .iter()
        .position(|l| !l.starts_with('#') && !l.is_empty())
        .expect("summary has a header");
    let col = lines[header_idx]
        .split(',')
        .position(|h| h == "mean_rho")
        .expect("summary has mean_rho");
    let mut fields: Vec<&str> = lines[header_idx + 1].split(',').collect();
    fields[col] = "0.123456789";
    let doctored = fields.join(",");
    lines[header_idx + 1] = &doctored;
    std::fs::write(&summary_path, lines.join("\n") + "\n").unwrap();
    let out = resil(&["report", "--results", &dir.arg("results"), "--out", &dir.arg("tables")]);
    assert_exit(&out, 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not recompute"), "{stderr}");
}

#[test]
fn report_on_empty_directory_is_usage_error() {
    let dir = Dir::new();
    std::fs::create_dir_all(dir.path("empty")).unwrap();
    let out = resil(&["report", "--results", &dir.arg("empty"), "--out", &dir.arg("tables")]);
    assert_exit(&out, 2);
}
