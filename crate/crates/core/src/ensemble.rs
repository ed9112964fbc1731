//! Dawid-Skene two-coin EM ensemble over detector votes.
//!
//! Each of `M` detectors votes outlier/inlier on each of `n` records. EM
//! jointly infers the latent record labels, one 2x2 confusion matrix per
//! detector, and the class priors. The fitted confusion matrices directly
//! give per-detector sensitivity and specificity estimates without any
//! ground truth, and the posterior labels act as a consensus detector.

use std::fmt::Write as _;

use crate::data::DetectionResult;
use crate::error::{Error, Result};
use crate::metrics::RatePanel;
use crate::scalar::Real;

/// Class / vote index for "outlier" (a flag raised).
const OUT: usize = 0;
/// Class / vote index for "inlier".
const IN: usize = 1;

/// The boolean vote matrix: `votes[i][m]` is true when method `m` flags
/// record `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    votes: Vec<bool>,
    n: usize,
    m: usize,
    method_ids: Vec<String>,
}

impl LabelMatrix {
    /// Wraps a row-major `n x M` vote buffer.
    pub fn new(method_ids: Vec<String>, votes: Vec<bool>) -> Result<Self> {
        let m = method_ids.len();
        if m == 0 {
            return Err(Error::Dimension("label matrix needs at least one method".into()));
        }
        if votes.is_empty() || !votes.len().is_multiple_of(m) {
            return Err(Error::Dimension(format!(
                "vote buffer of length {} is not a non-empty multiple of {m} methods",
                votes.len()
            )));
        }
        let n = votes.len() / m;
        Ok(LabelMatrix {
            votes,
            n,
            m,
            method_ids,
        })
    }

    /// Builds the matrix from per-method flag vectors.
    pub fn from_columns(columns: &[(String, Vec<bool>)]) -> Result<Self> {
        let m = columns.len();
        let n = columns.first().map_or(0, |(_, v)| v.len());
        if columns.iter().any(|(_, v)| v.len() != n) {
            return Err(Error::Dimension(
                "methods voted on differing numbers of records".into(),
            ));
        }
        let mut votes = vec![false; n * m];
        for (j, (_, col)) in columns.iter().enumerate() {
            for (i, &f) in col.iter().enumerate() {
                votes[i * m + j] = f;
            }
        }
        LabelMatrix::new(columns.iter().map(|(id, _)| id.clone()).collect(), votes)
    }

    /// Builds the matrix from detection results over the same records.
    pub fn from_results(results: &[DetectionResult]) -> Result<Self> {
        let columns: Vec<(String, Vec<bool>)> = results
            .iter()
            .map(|r| (r.method().to_string(), r.record_flags().to_vec()))
            .collect();
        LabelMatrix::from_columns(&columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_methods(&self) -> usize {
        self.m
    }

    pub fn method_ids(&self) -> &[String] {
        &self.method_ids
    }

    pub fn vote(&self, i: usize, m: usize) -> bool {
        self.votes[i * self.m + m]
    }
}

/// EM hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Hard iteration cap.
    pub max_iter: usize,
    /// Convergence threshold on the largest absolute posterior change.
    pub tol: f64,
    /// Additive smoothing on every estimated probability, preventing
    /// zero-probability lock-in on small samples.
    pub smoothing: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 200,
            tol: 1e-7,
            smoothing: 1e-6,
        }
    }
}

/// A fitted ensemble: confusion matrices, priors, posteriors, and consensus
/// labels.
#[derive(Debug, Clone)]
pub struct EnsembleModel<T> {
    method_ids: Vec<String>,
    /// `pi[m][a][b]` = P(method m votes b | record class a); index 0 is
    /// "outlier" on both axes.
    pi: Vec<[[T; 2]; 2]>,
    /// `[p_outlier, p_inlier]`.
    priors: [T; 2],
    /// Row-major `n x 2` posterior matrix.
    posteriors: Vec<[T; 2]>,
    /// Consensus: posterior of "outlier" at least 0.5.
    labels: Vec<bool>,
    iterations: usize,
    converged: bool,
    /// Penalized observed-data log-likelihood after each iteration; the
    /// additive-smoothing M-step maximizes exactly this objective, so the
    /// trace is provably non-decreasing.
    log_likelihood: Vec<f64>,
}

impl<T: Real> EnsembleModel<T> {
    pub fn method_ids(&self) -> &[String] {
        &self.method_ids
    }

    pub fn n_methods(&self) -> usize {
        self.method_ids.len()
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Confusion matrix of method `m`.
    pub fn pi(&self, m: usize) -> [[T; 2]; 2] {
        self.pi[m]
    }

    /// `[p_outlier, p_inlier]`.
    pub fn priors(&self) -> [T; 2] {
        self.priors
    }

    /// `[P(outlier | votes), P(inlier | votes)]` for record `i`.
    pub fn posterior(&self, i: usize) -> [T; 2] {
        self.posteriors[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn log_likelihood(&self) -> &[f64] {
        &self.log_likelihood
    }

    /// Plain-text report: priors, iteration count, and each method's
    /// confusion matrix.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "ensemble model: {} methods, {} records",
            self.n_methods(),
            self.n()
        );
        let _ = writeln!(
            s,
            "converged: {} after {} iterations",
            self.converged, self.iterations
        );
        let _ = writeln!(
            s,
            "priors: outlier={:.6} inlier={:.6}",
            self.priors[OUT].as_f64(),
            self.priors[IN].as_f64()
        );
        let _ = writeln!(
            s,
            "{:<24} {:>12} {:>12} {:>12} {:>12}",
            "method", "p(flag|out)", "p(pass|out)", "p(flag|in)", "p(pass|in)"
        );
        for (m, id) in self.method_ids.iter().enumerate() {
            let pi = self.pi[m];
            let _ = writeln!(
                s,
                "{:<24} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                id,
                pi[OUT][OUT].as_f64(),
                pi[OUT][IN].as_f64(),
                pi[IN][OUT].as_f64(),
                pi[IN][IN].as_f64()
            );
        }
        s
    }
}

/// Fits the two-coin model with majority-vote initialization.
///
/// The printed Dawid-Skene recipe initializes everything at 0.5, which is a
/// symmetric fixed point the iteration can never leave; initializing the
/// posteriors with the per-record vote share is the standard fix.
pub fn em_fit<T: Real>(votes: &LabelMatrix, opts: &EmOptions) -> EnsembleModel<T> {
    let m = T::of_usize(votes.n_methods());
    let init: Vec<T> = (0..votes.n())
        .map(|i| {
            let count = (0..votes.n_methods()).filter(|&j| votes.vote(i, j)).count();
            T::of_usize(count) / m
        })
        .collect();
    em_fit_from(votes, opts, &init)
}

/// Fits the two-coin model from explicit initial outlier posteriors (one
/// value in `[0,1]` per record). Exposed so convergence can be probed from
/// chosen starting points; most callers want [`em_fit`].
pub fn em_fit_from<T: Real>(
    votes: &LabelMatrix,
    opts: &EmOptions,
    init_outlier_posterior: &[T],
) -> EnsembleModel<T> {
    let n = votes.n();
    let n_methods = votes.n_methods();
    assert_eq!(
        init_outlier_posterior.len(),
        n,
        "one initial posterior per record"
    );
    let s = T::of(opts.smoothing);

    let mut q: Vec<[T; 2]> = init_outlier_posterior
        .iter()
        .map(|&p| [p, T::one() - p])
        .collect();
    let mut labels: Vec<bool> = q.iter().map(|r| r[OUT] >= T::of(0.5)).collect();

    let mut pi = vec![[[T::zero(); 2]; 2]; n_methods];
    let mut priors = [T::zero(); 2];
    let mut log_likelihood = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;

        // M-step: soft counts with additive smoothing. Each row gets the
        // smoothing term on both entries, so rows stay exactly stochastic.
        for (j, pi_j) in pi.iter_mut().enumerate() {
            let mut counts = [[T::zero(); 2]; 2];
            for (i, q_i) in q.iter().enumerate() {
                let b = if votes.vote(i, j) { OUT } else { IN };
                counts[OUT][b] = counts[OUT][b] + q_i[OUT];
                counts[IN][b] = counts[IN][b] + q_i[IN];
            }
            for a in [OUT, IN] {
                let total = counts[a][OUT] + counts[a][IN];
                for b in [OUT, IN] {
                    pi_j[a][b] = (s + counts[a][b]) / (s + s + total);
                }
            }
        }
        let q_out_total: T = q.iter().map(|r| r[OUT]).sum();
        priors[OUT] = (s + q_out_total) / (s + s + T::of_usize(n));
        priors[IN] = T::one() - priors[OUT];

        // E-step in log space, reusing the per-record log-mixture for the
        // observed-data likelihood.
        let mut ll = 0.0f64;
        let mut max_delta = T::zero();
        let mut labels_changed = false;
        for i in 0..n {
            let mut lw = [priors[OUT].as_f64().ln(), priors[IN].as_f64().ln()];
            for (j, pi_j) in pi.iter().enumerate() {
                let b = if votes.vote(i, j) { OUT } else { IN };
                lw[OUT] += pi_j[OUT][b].as_f64().ln();
                lw[IN] += pi_j[IN][b].as_f64().ln();
            }
            let mx = lw[OUT].max(lw[IN]);
            let w = [(lw[OUT] - mx).exp(), (lw[IN] - mx).exp()];
            let total = w[0] + w[1];
            ll += mx + total.ln();
            let new_q = [T::of(w[0] / total), T::of(w[1] / total)];
            let delta = (new_q[OUT] - q[i][OUT]).abs();
            if delta > max_delta {
                max_delta = delta;
            }
            q[i] = new_q;
            let label = new_q[OUT] >= T::of(0.5);
            if label != labels[i] {
                labels[i] = label;
                labels_changed = true;
            }
        }

        // Penalty terms turn the smoothed M-step into an exact maximizer of
        // this objective, which is what makes the trace monotone.
        for pi_j in &pi {
            for a in [OUT, IN] {
                for b in [OUT, IN] {
                    ll += opts.smoothing * pi_j[a][b].as_f64().ln();
                }
            }
        }
        ll += opts.smoothing * (priors[OUT].as_f64().ln() + priors[IN].as_f64().ln());
        log_likelihood.push(ll);

        if !labels_changed || max_delta < T::of(opts.tol) {
            converged = true;
            break;
        }
    }

    // The two-coin model is symmetric under swapping the class names; pin
    // the convention "outliers are the minority class".
    if priors[OUT] > T::of(0.5) {
        for pi_j in &mut pi {
            pi_j.swap(OUT, IN);
        }
        priors.swap(OUT, IN);
        for q_i in &mut q {
            q_i.swap(OUT, IN);
        }
        for (label, q_i) in labels.iter_mut().zip(&q) {
            *label = q_i[OUT] >= T::of(0.5);
        }
    }

    EnsembleModel {
        method_ids: votes.method_ids().to_vec(),
        pi,
        priors,
        posteriors: q,
        labels,
        iterations,
        converged,
        log_likelihood,
    }
}

/// The consensus labeling of a fitted model.
pub fn consensus_flags<T: Real>(model: &EnsembleModel<T>) -> Vec<bool> {
    model.labels().to_vec()
}

/// Sensitivity/specificity panel of method `m` as inferred by the ensemble:
/// alpha from P(flag | outlier), beta from P(pass | inlier), gamma from the
/// outlier prior.
pub fn method_rates<T: Real>(model: &EnsembleModel<T>, m: usize) -> Result<RatePanel<T>> {
    if m >= model.n_methods() {
        return Err(Error::Range(format!(
            "method index {m} out of range for {} methods",
            model.n_methods()
        )));
    }
    let pi = model.pi(m);
    RatePanel::new(pi[OUT][OUT], pi[IN][IN], model.priors()[OUT])
}

/// Panel for the consensus labeling itself, scored against the model's own
/// soft posteriors (with the same smoothing as the M-step). This treats the
/// consensus as one more annotator whose ground truth is the inferred
/// posterior distribution.
pub fn consensus_rates<T: Real>(model: &EnsembleModel<T>, smoothing: f64) -> Result<RatePanel<T>> {
    let s = T::of(smoothing);
    let mut flagged_out = T::zero();
    let mut total_out = T::zero();
    let mut passed_in = T::zero();
    let mut total_in = T::zero();
    for (i, &label) in model.labels().iter().enumerate() {
        let q = model.posterior(i);
        total_out = total_out + q[OUT];
        total_in = total_in + q[IN];
        if label {
            flagged_out = flagged_out + q[OUT];
        } else {
            passed_in = passed_in + q[IN];
        }
    }
    RatePanel::new(
        (s + flagged_out) / (s + s + total_out),
        (s + passed_in) / (s + s + total_in),
        model.priors()[OUT],
    )
}
