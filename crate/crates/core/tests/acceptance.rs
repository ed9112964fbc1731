//! Acceptance suite: eight end-to-end criteria, one test each, every test
//! printing a single `ACCEPTANCE <n> <name>: PASS/FAIL` line (visible with
//! `--nocapture` or on failure) before asserting.
//!
//! Criteria 3 and 4 encode reference target tables for the blind estimation
//! pipeline. The measured values are reported honestly; see the assertions
//! for the accepted bounds.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use outlier_resilience::detectors::{lof, mahalanobis};
use outlier_resilience::seed::substream;
use outlier_resilience::synthgen::{generate, generate_fig1, OutlierDistribution, SynthSpec};
use outlier_resilience::{
    em_fit, evaluate_resilience, expected_overlaps, resilience_exact, resilience_from_expectations,
    Dataset, DetectorConfig, EmOptions, EvalOptions, EvaluationMode, LabelMatrix, Method,
    RatePanel, SchemeSpec,
};

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

// --------------------------------------------------------------------------
// 1. Resilience metric properties: exact set arithmetic on random pairs.
// --------------------------------------------------------------------------

#[test]
fn criterion_1_resilience_metric_properties() {
    let start = std::time::Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC1);
    let mut checked = 0usize;

    let check_pair = |a: &[bool], b: &[bool]| {
        let inter = a.iter().zip(b).filter(|(&x, &y)| x && y).count();
        let ca = a.iter().filter(|&&x| x).count();
        let cb = b.iter().filter(|&&x| x).count();
        let rho: f64 = resilience_exact(a, b).unwrap();
        let swapped: f64 = resilience_exact(b, a).unwrap();
        // Exact rational value: 2|A∩B| / (|A|+|B|), with 1 for the 0/0 case.
        let expected = if ca + cb == 0 {
            1.0
        } else {
            (2 * inter) as f64 / (ca + cb) as f64
        };
        assert_eq!(rho, expected, "rho must equal its rational definition");
        assert_eq!(rho, swapped, "rho must be symmetric");
        assert!((0.0..=1.0).contains(&rho), "rho must lie in [0,1]");
        assert_eq!(
            rho == 1.0,
            a == b,
            "rho = 1 exactly when the flag sets are equal"
        );
        assert_eq!(
            rho == 0.0,
            inter == 0 && ca + cb > 0,
            "rho = 0 exactly when the sets are nonempty and disjoint"
        );
    };

    // Directed edge cases first.
    check_pair(&[], &[]);
    check_pair(&[false; 5], &[false; 5]);
    check_pair(&[true, true, false], &[true, true, false]);
    check_pair(&[true, false, false], &[false, true, false]);
    check_pair(&[true, true, true], &[true, false, false]);
    checked += 5;

    while checked < 10_000 {
        let n = rng.random_range(1..=64);
        let pa: f64 = rng.random_range(0.0..=1.0);
        let pb: f64 = rng.random_range(0.0..=1.0);
        let a: Vec<bool> = (0..n).map(|_| rng.random_bool(pa)).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.random_bool(pb)).collect();
        check_pair(&a, &b);
        checked += 1;
    }

    let elapsed = start.elapsed();
    let ok = elapsed.as_secs_f64() < 5.0;
    println!(
        "ACCEPTANCE 1 resilience-metric-properties: {} ({checked} pairs, {:.2}s)",
        verdict(ok),
        elapsed.as_secs_f64()
    );
    assert!(ok, "property suite exceeded the 5 s budget: {elapsed:?}");
}

// --------------------------------------------------------------------------
// 2. Expected-overlap model: worked panel plus the partition identity.
// --------------------------------------------------------------------------

#[test]
fn criterion_2_expected_overlap_model() {
    let whole = RatePanel::new(0.9, 0.95, 0.1).unwrap();
    let sample = RatePanel::new(0.8, 0.9, 0.1).unwrap();
    let oc = expected_overlaps::<f64>(100, &whole, &sample).unwrap();
    let rho = resilience_from_expectations(&oc);

    let close = |x: f64, target: f64| (x - target).abs() <= 1e-4;
    let mut ok = close(oc.both, 7.65)
        && close(oc.sample_only, 9.35)
        && close(oc.whole_only, 5.85)
        && close(rho, 15.3 / 30.5);

    let mut rng = StdRng::seed_from_u64(0xC2);
    let mut worst_gap = 0.0f64;
    for _ in 0..1_000 {
        let size = rng.random_range(1..=1_000usize);
        let gamma: f64 = rng.random_range(0.0..=1.0);
        let w = RatePanel::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0), gamma)
            .unwrap();
        let s = RatePanel::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0), gamma)
            .unwrap();
        let oc = expected_overlaps::<f64>(size, &w, &s).unwrap();
        let gap = (oc.total() - size as f64).abs();
        worst_gap = worst_gap.max(gap);
    }
    ok &= worst_gap <= 1e-9;

    println!(
        "ACCEPTANCE 2 expected-overlap-model: {} (both={:.4}, sample_only={:.4}, whole_only={:.4}, rho={:.4}, worst sum gap={worst_gap:.2e})",
        verdict(ok),
        oc.both,
        oc.sample_only,
        oc.whole_only,
        rho
    );
    assert!(
        close(oc.both, 7.65) && close(oc.sample_only, 9.35) && close(oc.whole_only, 5.85),
        "worked panel counts off: {oc:?}"
    );
    assert!(close(rho, 15.3 / 30.5), "worked panel rho off: {rho}");
    assert!(worst_gap <= 1e-9, "overlap counts must sum to |S|: gap {worst_gap:.2e}");
}

// --------------------------------------------------------------------------
// 3. Reference MSE table for the blind resilience estimator, at x10.
// --------------------------------------------------------------------------

/// (distribution, gamma, N, parts, reference 3-sigma MSE, reference boxplot MSE)
const MSE_TABLE: [(OutlierDistribution, f64, usize, usize, f64, f64); 16] = [
    (OutlierDistribution::Dist1, 0.05, 1_000, 10, 1.2e-2, 1.1e-3),
    (OutlierDistribution::Dist1, 0.05, 1_000, 20, 1.8e-2, 3.8e-3),
    (OutlierDistribution::Dist1, 0.05, 10_000, 10, 3.8e-4, 3.5e-5),
    (OutlierDistribution::Dist1, 0.05, 10_000, 20, 7.1e-4, 6.9e-5),
    (OutlierDistribution::Dist1, 0.10, 1_000, 10, 2.8e-2, 1.6e-3),
    (OutlierDistribution::Dist1, 0.10, 1_000, 20, 2.0e-2, 5.2e-3),
    (OutlierDistribution::Dist1, 0.10, 10_000, 10, 2.1e-3, 2.1e-5),
    (OutlierDistribution::Dist1, 0.10, 10_000, 20, 5.0e-3, 3.5e-5),
    (OutlierDistribution::Dist2, 0.05, 1_000, 10, 5.7e-3, 1.8e-3),
    (OutlierDistribution::Dist2, 0.05, 1_000, 20, 1.0e-2, 5.9e-3),
    (OutlierDistribution::Dist2, 0.05, 10_000, 10, 1.4e-4, 8.7e-5),
    (OutlierDistribution::Dist2, 0.05, 10_000, 20, 2.8e-4, 1.4e-4),
    (OutlierDistribution::Dist2, 0.10, 1_000, 10, 1.1e-2, 9.1e-4),
    (OutlierDistribution::Dist2, 0.10, 1_000, 20, 1.8e-2, 2.8e-3),
    (OutlierDistribution::Dist2, 0.10, 10_000, 10, 4.0e-4, 4.9e-5),
    (OutlierDistribution::Dist2, 0.10, 10_000, 20, 6.5e-4, 7.9e-5),
];

#[test]
fn criterion_3_blind_mse_table_reproduction() {
    let replications = 100u64;
    let mut failures = Vec::new();
    let mut passed_cells = 0usize;

    for &(dist, gamma, n, k, target_sigma, target_box) in &MSE_TABLE {
        let per_rep: Vec<(f64, f64, usize)> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let master = substream(substream(0xC3, "cell", (n + k) as u64), "rep", rep);
                let spec = SynthSpec::new(n, dist, gamma, substream(master, "data", 0));
                let ds = generate(&spec).unwrap();
                let detectors = [
                    DetectorConfig::new(Method::ThreeSigma),
                    DetectorConfig::new(Method::Boxplot),
                ];
                let report = evaluate_resilience(
                    &ds,
                    &detectors,
                    SchemeSpec::Partition { k },
                    1,
                    &EvalOptions::new(EvaluationMode::Both),
                    substream(master, "eval", 0),
                )
                .unwrap();
                let exact = report.exact.unwrap();
                let blind = report.blind.unwrap();
                let mut se = (0.0, 0.0);
                for (s, ex) in exact.iter().enumerate() {
                    se.0 += (blind.rho[s][0] - ex[0]).powi(2);
                    se.1 += (blind.rho[s][1] - ex[1]).powi(2);
                }
                (se.0, se.1, exact.len())
            })
            .collect();
        let total: usize = per_rep.iter().map(|r| r.2).sum();
        let mse_sigma = per_rep.iter().map(|r| r.0).sum::<f64>() / total as f64;
        let mse_box = per_rep.iter().map(|r| r.1).sum::<f64>() / total as f64;

        let cell_ok = mse_sigma <= 10.0 * target_sigma && mse_box <= 10.0 * target_box;
        if cell_ok {
            passed_cells += 1;
        } else {
            failures.push(format!(
                "{dist} gamma={gamma} N={n} k={k}: 3sigma {mse_sigma:.2e} vs bound {:.2e}, boxplot {mse_box:.2e} vs bound {:.2e}",
                10.0 * target_sigma,
                10.0 * target_box
            ));
        }
    }

    let ok = failures.is_empty();
    println!(
        "ACCEPTANCE 3 blind-mse-table: {} ({passed_cells}/16 cells within x10 of the reference MSE)",
        verdict(ok)
    );
    assert!(
        ok,
        "blind-estimate MSE exceeded x10 of the reference cells:\n{}",
        failures.join("\n")
    );
}

// --------------------------------------------------------------------------
// 4. Reference rate-recovery RMSE for the EM ensemble pipeline.
// --------------------------------------------------------------------------

#[test]
fn criterion_4_em_rate_recovery_rmse() {
    let n = 10_000usize;
    // (label, scheme, fresh-dataset replications); each cell pools ~50 samples.
    let schemes: [(&str, SchemeSpec, u64); 4] = [
        ("random-5%", SchemeSpec::Random { size: n / 20 }, 50),
        ("random-10%", SchemeSpec::Random { size: n / 10 }, 50),
        ("partition-5", SchemeSpec::Partition { k: 5 }, 10),
        ("partition-10", SchemeSpec::Partition { k: 10 }, 5),
    ];
    let mut failures = Vec::new();
    let mut passed_cells = 0usize;

    for dist in [OutlierDistribution::Dist1, OutlierDistribution::Dist2] {
        for gamma in [0.01, 0.05, 0.10] {
            for (label, scheme, reps) in &schemes {
                let per_rep: Vec<(f64, f64, usize)> = (0..*reps)
                    .into_par_iter()
                    .map(|rep| {
                        let master = substream(
                            substream(0xC4, label, (gamma * 100.0) as u64),
                            "rep",
                            rep,
                        );
                        let spec = SynthSpec::new(n, dist, gamma, substream(master, "data", 0));
                        let ds = generate(&spec).unwrap();
                        let detectors: Vec<DetectorConfig<f64>> =
                            Method::ALL.iter().map(|&m| DetectorConfig::new(m)).collect();
                        let report = evaluate_resilience(
                            &ds,
                            &detectors,
                            *scheme,
                            1,
                            &EvalOptions::new(EvaluationMode::Blind),
                            substream(master, "eval", 0),
                        )
                        .unwrap();
                        let blind = report.blind.unwrap();
                        let true_panels = report.true_panels.unwrap();
                        let mut se = (0.0, 0.0);
                        let mut count = 0usize;
                        for (s, panels) in true_panels.iter().enumerate() {
                            for (m, truth) in panels.iter().enumerate() {
                                if let Some(truth) = truth {
                                    let est = &blind.sample_panels[s][m];
                                    se.0 += (est.alpha - truth.alpha).powi(2);
                                    se.1 += (est.beta - truth.beta).powi(2);
                                    count += 1;
                                }
                            }
                        }
                        (se.0, se.1, count)
                    })
                    .collect();
                let count: usize = per_rep.iter().map(|r| r.2).sum();
                let rmse_alpha = (per_rep.iter().map(|r| r.0).sum::<f64>() / count as f64).sqrt();
                let rmse_beta = (per_rep.iter().map(|r| r.1).sum::<f64>() / count as f64).sqrt();

                let cell_ok = rmse_alpha <= 0.08 && rmse_beta <= 0.10;
                if cell_ok {
                    passed_cells += 1;
                } else {
                    failures.push(format!(
                        "{dist} gamma={gamma} {label}: RMSE(alpha)={rmse_alpha:.3} (bound 0.08), RMSE(beta)={rmse_beta:.3} (bound 0.10)"
                    ));
                }
            }
        }
    }

    let ok = failures.is_empty();
    println!(
        "ACCEPTANCE 4 em-rate-recovery-rmse: {} ({passed_cells}/24 cells within RMSE(alpha) 0.08 / RMSE(beta) 0.10)",
        verdict(ok)
    );
    assert!(
        ok,
        "EM rate recovery exceeded the RMSE bounds:\n{}",
        failures.join("\n")
    );
}

// --------------------------------------------------------------------------
// 5. Qualitative ordering on the bivariate shift dataset.
// --------------------------------------------------------------------------

#[test]
fn criterion_5_three_sigma_beats_boxplot_on_fig1_data() {
    let seeds = 100u64;
    let per_seed: Vec<(f64, f64)> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let ds = generate_fig1::<f64>(substream(0xC5, "data", s));
            let detectors = [
                DetectorConfig::new(Method::ThreeSigma),
                DetectorConfig::new(Method::Boxplot),
            ];
            let report = evaluate_resilience(
                &ds,
                &detectors,
                SchemeSpec::Random { size: ds.n_rows() / 10 },
                1,
                &EvalOptions::new(EvaluationMode::Exact),
                substream(0xC5, "eval", s),
            )
            .unwrap();
            let exact = report.exact.unwrap();
            (exact[0][0], exact[0][1])
        })
        .collect();
    let mean_sigma: f64 = per_seed.iter().map(|p| p.0).sum::<f64>() / seeds as f64;
    let mean_box: f64 = per_seed.iter().map(|p| p.1).sum::<f64>() / seeds as f64;

    let ok = mean_sigma > mean_box;
    println!(
        "ACCEPTANCE 5 three-sigma-vs-boxplot-ordering: {} (mean rho 3sigma={mean_sigma:.4} > boxplot={mean_box:.4} over {seeds} seeds)",
        verdict(ok)
    );
    assert!(
        ok,
        "expected mean exact resilience of 3sigma ({mean_sigma:.4}) to exceed boxplot ({mean_box:.4})"
    );
}

// --------------------------------------------------------------------------
// 6. Score oracles: brute-force LOF and Mahalanobis reimplementations.
// --------------------------------------------------------------------------

/// Textbook LOF: full distance matrix, full sorts, tie-inclusive
/// neighborhoods, reachability in plain (non-squared) distances.
fn lof_brute_force(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = rows.len();
    let dist = |a: usize, b: usize| -> f64 {
        rows[a]
            .iter()
            .zip(&rows[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut kdist = vec![0.0f64; n];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let mut all: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dist(i, j), j))
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        kdist[i] = all[k - 1].0;
        nbrs[i] = all
            .iter()
            .filter(|&&(d, _)| d <= kdist[i])
            .map(|&(_, j)| j)
            .collect();
    }
    let lrd: Vec<f64> = (0..n)
        .map(|i| {
            let s: f64 = nbrs[i].iter().map(|&o| dist(i, o).max(kdist[o])).sum();
            if s == 0.0 {
                f64::INFINITY
            } else {
                nbrs[i].len() as f64 / s
            }
        })
        .collect();
    (0..n)
        .map(|i| {
            if lrd[i].is_infinite() {
                1.0
            } else {
                nbrs[i].iter().map(|&o| lrd[o]).sum::<f64>() / lrd[i] / nbrs[i].len() as f64
            }
        })
        .collect()
}

/// Gauss-Jordan inverse of the ridge-stabilized sample covariance, then the
/// explicit quadratic form. Same definition, different linear algebra than
/// the library's Cholesky solve.
fn mahalanobis_brute_force(rows: &[Vec<f64>], ridge_epsilon: f64) -> Vec<f64> {
    let n = rows.len();
    let v = rows[0].len();
    let mut mean = vec![0.0f64; v];
    for row in rows {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0f64; v]; v];
    for row in rows {
        for a in 0..v {
            for b in 0..v {
                cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    for row in &mut cov {
        for x in row.iter_mut() {
            *x /= (n - 1) as f64;
        }
    }
    let trace: f64 = (0..v).map(|a| cov[a][a]).sum();
    let ridge = ridge_epsilon * trace / v as f64;
    for (a, row) in cov.iter_mut().enumerate() {
        row[a] += ridge;
    }

    // Gauss-Jordan with partial pivoting on [cov | I].
    let mut aug: Vec<Vec<f64>> = (0..v)
        .map(|a| {
            let mut row = cov[a].clone();
            row.extend((0..v).map(|b| if a == b { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..v {
        let pivot = (col..v)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        for x in &mut aug[col] {
            *x /= p;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != col {
                let f = row[col];
                for (x, &pc) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pc;
                }
            }
        }
    }
    let inv: Vec<Vec<f64>> = aug.iter().map(|row| row[v..].to_vec()).collect();

    rows.iter()
        .map(|row| {
            let d: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
            let mut q = 0.0;
            for a in 0..v {
                for b in 0..v {
                    q += d[a] * inv[a][b] * d[b];
                }
            }
            q
        })
        .collect()
}

#[test]
fn criterion_6_score_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(0xC6);
    let mut worst_lof = 0.0f64;
    let mut worst_mahal = 0.0f64;
    let instances = 100usize;

    for _ in 0..instances {
        let v = rng.random_range(1..=5usize);
        let n = rng.random_range((2 * v + 5).max(12)..=50usize);
        let k = rng.random_range(1..=8usize.min(n - 2));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..v).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let ds = Dataset::from_rows("oracle", &rows).unwrap();

        let lib_lof: Vec<f64> = lof::scores(&ds, k).unwrap();
        let ref_lof = lof_brute_force(&rows, k);
        for (a, b) in lib_lof.iter().zip(&ref_lof) {
            worst_lof = worst_lof.max((a - b).abs());
        }

        let lib_mahal: Vec<f64> = mahalanobis::sq_distances(&ds, 1e-8).unwrap();
        let ref_mahal = mahalanobis_brute_force(&rows, 1e-8);
        for (a, b) in lib_mahal.iter().zip(&ref_mahal) {
            worst_mahal = worst_mahal.max((a - b).abs());
        }
    }

    let ok = worst_lof <= 1e-9 && worst_mahal <= 1e-9;
    println!(
        "ACCEPTANCE 6 score-oracle-equivalence: {} ({instances} instances, worst LOF gap {worst_lof:.2e}, worst Mahalanobis gap {worst_mahal:.2e})",
        verdict(ok)
    );
    assert!(worst_lof <= 1e-9, "LOF deviates from brute force: {worst_lof:.2e}");
    assert!(
        worst_mahal <= 1e-9,
        "Mahalanobis deviates from brute force: {worst_mahal:.2e}"
    );
}

// --------------------------------------------------------------------------
// 7. EM correctness on planted two-coin data.
// --------------------------------------------------------------------------

#[test]
fn criterion_7_em_planted_recovery() {
    let n = 5_000usize;
    let alphas = [0.70, 0.75, 0.85, 0.90, 0.95];
    let betas = [0.80, 0.85, 0.90, 0.95, 0.99];
    let gamma = 0.1;

    let mut rng = StdRng::seed_from_u64(0xC7);
    let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(gamma)).collect();
    let columns: Vec<(String, Vec<bool>)> = alphas
        .iter()
        .zip(&betas)
        .enumerate()
        .map(|(m, (&a, &b))| {
            let votes: Vec<bool> = truth
                .iter()
                .map(|&t| {
                    if t {
                        rng.random_bool(a)
                    } else {
                        !rng.random_bool(b)
                    }
                })
                .collect();
            (format!("coin_{m}"), votes)
        })
        .collect();
    let votes = LabelMatrix::from_columns(&columns).unwrap();
    let model = em_fit::<f64>(&votes, &EmOptions::default());

    let mut se_alpha = 0.0;
    let mut se_beta = 0.0;
    for m in 0..5 {
        let pi = model.pi(m);
        se_alpha += (pi[0][0] - alphas[m]).powi(2);
        se_beta += (pi[1][1] - betas[m]).powi(2);
    }
    let rmse_alpha = (se_alpha / 5.0).sqrt();
    let rmse_beta = (se_beta / 5.0).sqrt();

    let ll = model.log_likelihood();
    let mut monotone = true;
    for w in ll.windows(2) {
        if w[1] < w[0] - 1e-9 {
            monotone = false;
        }
    }

    // Unanimous fixture: every method casts the identical vote pattern.
    let mut rng2 = StdRng::seed_from_u64(0xC7 + 1);
    let pattern: Vec<bool> = (0..200).map(|_| rng2.random_bool(0.2)).collect();
    let unanimous = LabelMatrix::from_columns(&[
        ("u0".into(), pattern.clone()),
        ("u1".into(), pattern.clone()),
        ("u2".into(), pattern.clone()),
    ])
    .unwrap();
    let consensus = em_fit::<f64>(&unanimous, &EmOptions::default());
    let unanimous_ok = consensus.labels() == pattern.as_slice() && consensus.iterations() <= 2;

    let ok = rmse_alpha <= 0.05 && rmse_beta <= 0.05 && monotone && unanimous_ok;
    println!(
        "ACCEPTANCE 7 em-planted-recovery: {} (RMSE(alpha)={rmse_alpha:.4}, RMSE(beta)={rmse_beta:.4}, loglik monotone={monotone}, unanimous in {} iters)",
        verdict(ok),
        consensus.iterations()
    );
    assert!(rmse_alpha <= 0.05, "planted alpha recovery RMSE {rmse_alpha:.4} > 0.05");
    assert!(rmse_beta <= 0.05, "planted beta recovery RMSE {rmse_beta:.4} > 0.05");
    assert!(monotone, "observed-data log-likelihood must be non-decreasing");
    assert!(
        unanimous_ok,
        "unanimous fixture must converge to the consensus within 2 iterations"
    );
}

// --------------------------------------------------------------------------
// 8. Ensemble resilience versus the median component.
// --------------------------------------------------------------------------

#[test]
fn criterion_8_ensemble_beats_median_component() {
    let n = 2_000usize;
    let mut counts = Vec::new();
    let mut ok = true;
    for frac in [0.05, 0.10] {
        let wins: usize = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let spec = SynthSpec::new(
                    n,
                    OutlierDistribution::Dist2,
                    0.10,
                    substream(seed, "c8d", 0),
                );
                let ds = generate(&spec).unwrap();
                let detectors: Vec<DetectorConfig<f64>> =
                    Method::ALL.iter().map(|&m| DetectorConfig::new(m)).collect();
                let report = evaluate_resilience(
                    &ds,
                    &detectors,
                    SchemeSpec::Random { size: (n as f64 * frac) as usize },
                    1,
                    &EvalOptions::new(EvaluationMode::Exact).with_ensemble(),
                    substream(seed, "c8", 0),
                )
                .unwrap();
                let exact = report.exact.unwrap();
                let ensemble = report.ensemble_exact.unwrap();
                let mut components = exact[0].clone();
                components.sort_by(|a, b| a.partial_cmp(b).unwrap());
                usize::from(ensemble[0] >= components[3])
            })
            .sum();
        ok &= wins >= 80;
        counts.push(format!("{:.0}%: {wins}/100", frac * 100.0));
    }

    println!(
        "ACCEPTANCE 8 ensemble-vs-median-component: {} ({})",
        verdict(ok),
        counts.join(", ")
    );
    assert!(
        ok,
        "ensemble exact resilience must match or beat the median component in >= 80/100 runs per fraction ({})",
        counts.join(", ")
    );
}

