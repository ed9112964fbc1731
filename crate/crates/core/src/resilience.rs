//! Resilience of detectors to sampling: the exact overlap metric, the
//! rate-based expectation model, and the estimation pipelines.
//!
//! Resilience compares two outlier sets over the *same* sampled records: the
//! set found by running a detector on the sample, and the set found by
//! running it on the whole dataset restricted to the sampled records. The
//! exact route needs both runs; the blind route never touches the whole
//! dataset and instead plugs EM-estimated sensitivity/specificity panels
//! into the expected-overlap model.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::detectors::{run_detector, DetectorConfig};
use crate::ensemble::{self, em_fit, EmOptions, LabelMatrix};
use crate::error::{Error, Result};
use crate::metrics::RatePanel;
use crate::samplers::{self, SampleIndex};
use crate::scalar::Real;
use crate::seed;
use crate::stats;

/// Exact resilience of one detector on one sample (Definition 1 style):
/// twice the overlap of the two flag sets over the sum of their sizes.
/// Both sets empty counts as perfect agreement (1), not 0/0.
///
/// `whole_flags_restricted` must already be filtered to the sampled records,
/// in the same order as `sample_flags`.
pub fn resilience_exact<T: Real>(
    sample_flags: &[bool],
    whole_flags_restricted: &[bool],
) -> Result<T> {
    if sample_flags.len() != whole_flags_restricted.len() {
        return Err(Error::Dimension(format!(
            "sample flags cover {} records, whole-run flags {}",
            sample_flags.len(),
            whole_flags_restricted.len()
        )));
    }
    let mut both = 0usize;
    let mut sample_only = 0usize;
    let mut whole_only = 0usize;
    for (&s, &w) in sample_flags.iter().zip(whole_flags_restricted) {
        match (s, w) {
            (true, true) => both += 1,
            (true, false) => sample_only += 1,
            (false, true) => whole_only += 1,
            (false, false) => {}
        }
    }
    let denom = 2 * both + sample_only + whole_only;
    if denom == 0 {
        return Ok(T::one());
    }
    Ok(T::of_usize(2 * both) / T::of_usize(denom))
}

/// Expected overlap counts between a sample run and a whole run, as real
/// numbers. Exact-mode counts are integers; estimated-mode counts are
/// expectations under the rate panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCounts<T> {
    /// Flagged by both runs.
    pub both: T,
    /// Flagged by neither.
    pub neither: T,
    /// Flagged only by the sample run.
    pub sample_only: T,
    /// Flagged only by the whole run.
    pub whole_only: T,
}

impl<T: Real> OverlapCounts<T> {
    pub fn total(&self) -> T {
        self.both + self.neither + self.sample_only + self.whole_only
    }
}

/// Expected overlap counts for a sample of `sample_size` records, given the
/// whole-run panel (alpha, beta, gamma) and the sample-run panel
/// (alpha_s, beta_s, same gamma). Assumes the two runs err independently
/// conditioned on each record's true class.
pub fn expected_overlaps<T: Real>(
    sample_size: usize,
    whole: &RatePanel<T>,
    sample: &RatePanel<T>,
) -> Result<OverlapCounts<T>> {
    if (whole.gamma - sample.gamma).abs() > T::of(1e-9) {
        return Err(Error::Domain(format!(
            "panels disagree on prevalence: {} vs {}",
            whole.gamma, sample.gamma
        )));
    }
    let size = T::of_usize(sample_size);
    let g = whole.gamma;
    let cg = T::one() - g;
    let (a, b) = (whole.alpha, whole.beta);
    let (a_s, b_s) = (sample.alpha, sample.beta);
    let one = T::one();
    Ok(OverlapCounts {
        both: size * (g * a * a_s + cg * (one - b) * (one - b_s)),
        neither: size * (cg * b * b_s + g * (one - a) * (one - a_s)),
        sample_only: size * (g * (one - a) * a_s + cg * b * (one - b_s)),
        whole_only: size * (g * a * (one - a_s) + cg * (one - b) * b_s),
    })
}

/// Resilience implied by expected overlap counts: the same harmonic form as
/// the exact metric, evaluated on expectations. All-zero numerator and
/// denominator (a detector that flags nothing anywhere) means agreement: 1.
pub fn resilience_from_expectations<T: Real>(oc: &OverlapCounts<T>) -> T {
    let denom = oc.both + oc.both + oc.sample_only + oc.whole_only;
    if denom == T::zero() {
        return T::one();
    }
    (oc.both + oc.both) / denom
}

/// Whether resilience is computed exactly or estimated blindly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    /// Run the detector on the whole dataset and compare flag sets.
    Exact,
    /// Never run on the whole dataset; estimate rates via the EM ensemble.
    Blind,
}

impl std::fmt::Display for EstimateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EstimateMode::Exact => "exact",
            EstimateMode::Blind => "blind",
        })
    }
}

impl std::str::FromStr for EstimateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EstimateMode::Exact),
            "blind" => Ok(EstimateMode::Blind),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected \"exact\" or \"blind\")"
            ))),
        }
    }
}

/// What a full evaluation computes. `Both` exists for studies that compare
/// the blind estimates against exact references.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    Exact,
    Blind,
    Both,
}

impl EvaluationMode {
    fn wants_exact(self) -> bool {
        matches!(self, EvaluationMode::Exact | EvaluationMode::Both)
    }

    fn wants_blind(self) -> bool {
        matches!(self, EvaluationMode::Blind | EvaluationMode::Both)
    }
}

impl From<EstimateMode> for EvaluationMode {
    fn from(m: EstimateMode) -> Self {
        match m {
            EstimateMode::Exact => EvaluationMode::Exact,
            EstimateMode::Blind => EvaluationMode::Blind,
        }
    }
}

/// A sampling scheme without a concrete draw: what to draw per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSpec {
    /// One uniform random sample of `size` records per replicate.
    Random { size: usize },
    /// One union of contiguous blocks per replicate.
    Block { n_blocks: usize, block_size: usize },
    /// One fresh partitioning per replicate; every part is evaluated as a
    /// sample, so each replicate contributes `k` values.
    Partition { k: usize },
}

impl std::fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeSpec::Random { size } => write!(f, "random(size={size})"),
            SchemeSpec::Block {
                n_blocks,
                block_size,
            } => write!(f, "block(n_blocks={n_blocks},block_size={block_size})"),
            SchemeSpec::Partition { k } => write!(f, "partition(k={k})"),
        }
    }
}

/// Which replicate and part a per-sample value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleInfo {
    pub replicate: usize,
    /// Part index within the replicate; 0 for non-partition schemes.
    pub part: usize,
    pub size: usize,
}

/// Everything the blind pipeline produced.
#[derive(Debug, Clone)]
pub struct BlindDetail<T> {
    /// Blind resilience per sample per method.
    pub rho: Vec<Vec<T>>,
    /// Per-sample EM panels (alpha, beta from that sample's fit; gamma is
    /// the pooled prior so the overlap model sees one prevalence).
    pub sample_panels: Vec<Vec<RatePanel<T>>>,
    /// The stand-in for the whole-dataset panel: across-sample mean of the
    /// EM estimates, per method.
    pub whole_panel: Vec<RatePanel<T>>,
    /// Pooled EM outlier prior.
    pub gamma: T,
    /// Raw per-sample EM priors (before pooling).
    pub sample_gammas: Vec<T>,
    /// Blind resilience of the EM consensus, per sample.
    pub ensemble_rho: Option<Vec<T>>,
    /// Per-sample consensus panels.
    pub ensemble_sample_panels: Option<Vec<RatePanel<T>>>,
    /// Pooled consensus panel.
    pub ensemble_whole_panel: Option<RatePanel<T>>,
}

/// Full evaluation output: per-sample values for every requested mode, plus
/// optional ground-truth panels for quality studies.
#[derive(Debug, Clone)]
pub struct ResilienceReport<T> {
    pub methods: Vec<String>,
    pub scheme: SchemeSpec,
    pub replicates: usize,
    pub samples: Vec<SampleInfo>,
    /// Exact resilience per sample per method (absent in blind-only mode).
    pub exact: Option<Vec<Vec<T>>>,
    /// Exact resilience of the EM consensus per sample.
    pub ensemble_exact: Option<Vec<T>>,
    pub blind: Option<BlindDetail<T>>,
    /// Per-sample panels measured against ground truth, when the dataset
    /// has labels: `None` entries mark samples where a rate was undefined
    /// (no true outliers, or no true inliers, among the sampled records).
    pub true_panels: Option<Vec<Vec<Option<RatePanel<T>>>>>,
}

/// Options for [`evaluate_resilience`].
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub mode: EvaluationMode,
    /// Also evaluate the EM consensus as an extra detector.
    pub include_ensemble: bool,
    pub em: EmOptions,
}

impl EvalOptions {
    pub fn new(mode: EvaluationMode) -> Self {
        EvalOptions {
            mode,
            include_ensemble: false,
            em: EmOptions::default(),
        }
    }

    pub fn with_ensemble(mut self) -> Self {
        self.include_ensemble = true;
        self
    }
}

/// One method's resilience estimate, summarized over replicates.
#[derive(Debug, Clone)]
pub struct ResilienceEstimate<T> {
    pub method: String,
    pub scheme: SchemeSpec,
    pub mode: EstimateMode,
    /// The headline estimate: the mean of `per_replicate`.
    pub point: T,
    /// One value per evaluated sample, replicate-major then part order.
    pub per_replicate: Vec<T>,
    pub mean: T,
    /// Sample standard deviation (divisor len-1); absent with fewer than
    /// two values.
    pub sd: Option<T>,
    /// Size of the first evaluated sample (partition parts can differ by
    /// one record).
    pub sample_size: usize,
}

fn summarize<T: Real>(
    method: impl Into<String>,
    scheme: SchemeSpec,
    mode: EstimateMode,
    values: Vec<T>,
    sample_size: usize,
) -> ResilienceEstimate<T> {
    let mean = stats::mean(&values);
    let sd = (values.len() >= 2).then(|| stats::sample_sd(&values));
    ResilienceEstimate {
        method: method.into(),
        scheme,
        mode,
        point: mean,
        per_replicate: values,
        mean,
        sd,
        sample_size,
    }
}

impl<T: Real> ResilienceReport<T> {
    /// Per-sample values of method `m` in the given mode.
    pub fn method_values(&self, m: usize, mode: EstimateMode) -> Result<Vec<T>> {
        let matrix = match mode {
            EstimateMode::Exact => self.exact.as_ref(),
            EstimateMode::Blind => self.blind.as_ref().map(|b| &b.rho),
        }
        .ok_or_else(|| Error::Config(format!("report holds no {mode} values")))?;
        if m >= self.methods.len() {
            return Err(Error::Range(format!(
                "method index {m} out of range for {} methods",
                self.methods.len()
            )));
        }
        Ok(matrix.iter().map(|row| row[m]).collect())
    }

    /// Summary estimate of method `m` in the given mode.
    pub fn method_estimate(&self, m: usize, mode: EstimateMode) -> Result<ResilienceEstimate<T>> {
        let values = self.method_values(m, mode)?;
        Ok(summarize(
            self.methods[m].clone(),
            self.scheme,
            mode,
            values,
            self.samples.first().map_or(0, |s| s.size),
        ))
    }

    /// Per-sample values of the EM consensus in the given mode.
    pub fn ensemble_values(&self, mode: EstimateMode) -> Result<Vec<T>> {
        match mode {
            EstimateMode::Exact => self.ensemble_exact.clone(),
            EstimateMode::Blind => self.blind.as_ref().and_then(|b| b.ensemble_rho.clone()),
        }
        .ok_or_else(|| Error::Config(format!("report holds no {mode} ensemble values")))
    }

    /// Summary estimate of the EM consensus in the given mode.
    pub fn ensemble_estimate(&self, mode: EstimateMode) -> Result<ResilienceEstimate<T>> {
        let values = self.ensemble_values(mode)?;
        Ok(summarize(
            "ensemble",
            self.scheme,
            mode,
            values,
            self.samples.first().map_or(0, |s| s.size),
        ))
    }
}

/// Per-sample work product, assembled in parallel.
struct PerSample<T> {
    exact_rho: Option<Vec<T>>,
    ensemble_exact_rho: Option<T>,
    em_alpha_beta: Option<Vec<(T, T)>>,
    em_gamma: Option<T>,
    ensemble_alpha_beta: Option<(T, T)>,
    true_panels: Option<Vec<Option<RatePanel<T>>>>,
}

/// Measures a panel against ground truth, returning `None` when either rate
/// is undefined on this sample.
fn gt_panel<T: Real>(flags: &[bool], truth: &[bool]) -> Option<RatePanel<T>> {
    let mut tp = 0usize;
    let mut tn = 0usize;
    let mut pos = 0usize;
    for (&f, &t) in flags.iter().zip(truth) {
        if t {
            pos += 1;
            if f {
                tp += 1;
            }
        } else if !f {
            tn += 1;
        }
    }
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    RatePanel::new(
        T::of_usize(tp) / T::of_usize(pos),
        T::of_usize(tn) / T::of_usize(neg),
        T::of_usize(pos) / T::of_usize(truth.len()),
    )
    .ok()
}

/// Draws every sample the scheme calls for, tagged with replicate and part.
fn draw_samples(
    n: usize,
    scheme: SchemeSpec,
    replicates: usize,
    seed: u64,
) -> Result<Vec<(SampleInfo, SampleIndex)>> {
    let mut out = Vec::new();
    for r in 0..replicates {
        let draw_seed = seed::substream(seed, "sample", r as u64);
        match scheme {
            SchemeSpec::Random { size } => {
                let s = samplers::random_sample(n, size, draw_seed)?;
                out.push((
                    SampleInfo {
                        replicate: r,
                        part: 0,
                        size: s.len(),
                    },
                    s,
                ));
            }
            SchemeSpec::Block {
                n_blocks,
                block_size,
            } => {
                let s = samplers::block_sample(n, n_blocks, block_size, draw_seed)?;
                out.push((
                    SampleInfo {
                        replicate: r,
                        part: 0,
                        size: s.len(),
                    },
                    s,
                ));
            }
            SchemeSpec::Partition { k } => {
                for (p, s) in samplers::partition(n, k, draw_seed)?.into_iter().enumerate() {
                    out.push((
                        SampleInfo {
                            replicate: r,
                            part: p,
                            size: s.len(),
                        },
                        s,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Runs the full evaluation: draws `replicates` rounds of samples, runs
/// every detector on every sample, and produces exact and/or blind
/// resilience values per sample and method.
///
/// The detector slice is shared across modes because blind estimation is
/// inherently joint: the EM ensemble needs all the votes at once. Exact
/// values fall out per method independently.
///
/// Detector seeds are derived per *method*, not per replicate, so a sample
/// that happens to equal the full dataset reproduces the whole-dataset run
/// exactly; sample-to-sample variation comes from the data, which is the
/// quantity under study.
pub fn evaluate_resilience<T: Real>(
    dataset: &Dataset<T>,
    detectors: &[DetectorConfig<T>],
    scheme: SchemeSpec,
    replicates: usize,
    options: &EvalOptions,
    seed: u64,
) -> Result<ResilienceReport<T>> {
    if replicates == 0 {
        return Err(Error::Range("need at least one replicate".into()));
    }
    if detectors.is_empty() {
        return Err(Error::Config("need at least one detector".into()));
    }
    for cfg in detectors {
        cfg.validate()?;
    }
    let n = dataset.n_rows();
    let n_methods = detectors.len();
    let detect_seeds: Vec<u64> = (0..n_methods)
        .map(|m| seed::substream(seed, "detect", m as u64))
        .collect();
    let need_em_per_sample = options.mode.wants_blind() || options.include_ensemble;

    // Whole-dataset reference runs (exact modes only; blind never looks).
    let whole_flags: Option<Vec<Vec<bool>>> = if options.mode.wants_exact() {
        let flags = detectors
            .iter()
            .zip(&detect_seeds)
            .map(|(cfg, &s)| Ok(run_detector(dataset, cfg, None, s)?.record_flags().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Some(flags)
    } else {
        None
    };
    let whole_consensus: Option<Vec<bool>> = match (&whole_flags, options.include_ensemble) {
        (Some(flags), true) => {
            let columns: Vec<(String, Vec<bool>)> = detectors
                .iter()
                .zip(flags)
                .map(|(cfg, f)| (cfg.method.name().to_string(), f.clone()))
                .collect();
            let votes = LabelMatrix::from_columns(&columns)?;
            let model = em_fit::<T>(&votes, &options.em);
            Some(model.labels().to_vec())
        }
        _ => None,
    };

    let samples = draw_samples(n, scheme, replicates, seed)?;

    let per_sample: Vec<PerSample<T>> = samples
        .par_iter()
        .map(|(_, sample)| -> Result<PerSample<T>> {
            let mut flags: Vec<Vec<bool>> = Vec::with_capacity(n_methods);
            for (cfg, &det_seed) in detectors.iter().zip(&detect_seeds) {
                flags.push(
                    run_detector(dataset, cfg, Some(sample), det_seed)?
                        .record_flags()
                        .to_vec(),
                );
            }

            let exact_rho = match &whole_flags {
                Some(whole) => {
                    let mut rho = Vec::with_capacity(n_methods);
                    for (m, f) in flags.iter().enumerate() {
                        let restricted: Vec<bool> =
                            sample.indices().iter().map(|&i| whole[m][i]).collect();
                        rho.push(resilience_exact(f, &restricted)?);
                    }
                    Some(rho)
                }
                None => None,
            };

            let model = if need_em_per_sample {
                let columns: Vec<(String, Vec<bool>)> = detectors
                    .iter()
                    .zip(&flags)
                    .map(|(cfg, f)| (cfg.method.name().to_string(), f.clone()))
                    .collect();
                Some(em_fit::<T>(&LabelMatrix::from_columns(&columns)?, &options.em))
            } else {
                None
            };

            let ensemble_exact_rho = match (&whole_consensus, &model) {
                (Some(whole), Some(model)) => {
                    let restricted: Vec<bool> =
                        sample.indices().iter().map(|&i| whole[i]).collect();
                    Some(resilience_exact(model.labels(), &restricted)?)
                }
                _ => None,
            };

            let (em_alpha_beta, em_gamma, ensemble_alpha_beta) = match &model {
                Some(model) if options.mode.wants_blind() => {
                    let mut ab = Vec::with_capacity(n_methods);
                    for m in 0..n_methods {
                        let panel = ensemble::method_rates(model, m)?;
                        ab.push((panel.alpha, panel.beta));
                    }
                    let ens = if options.include_ensemble {
                        let p = ensemble::consensus_rates(model, options.em.smoothing)?;
                        Some((p.alpha, p.beta))
                    } else {
                        None
                    };
                    (Some(ab), Some(model.priors()[0]), ens)
                }
                _ => (None, None, None),
            };

            let true_panels = dataset.ground_truth().map(|gt| {
                let truth: Vec<bool> = sample.indices().iter().map(|&i| gt[i]).collect();
                flags.iter().map(|f| gt_panel(f, &truth)).collect()
            });

            Ok(PerSample {
                exact_rho,
                ensemble_exact_rho,
                em_alpha_beta,
                em_gamma,
                ensemble_alpha_beta,
                true_panels,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let infos: Vec<SampleInfo> = samples.iter().map(|(i, _)| *i).collect();

    let exact = options
        .mode
        .wants_exact()
        .then(|| per_sample.iter().map(|p| p.exact_rho.clone().expect("exact mode")).collect());
    let ensemble_exact = (options.include_ensemble && options.mode.wants_exact()).then(|| {
        per_sample
            .iter()
            .map(|p| p.ensemble_exact_rho.expect("ensemble exact"))
            .collect()
    });

    let blind = if options.mode.wants_blind() {
        let sample_gammas: Vec<T> = per_sample
            .iter()
            .map(|p| p.em_gamma.expect("blind mode"))
            .collect();
        let gamma = stats::mean(&sample_gammas);

        // Whole-dataset stand-in: mean per-method rates across samples.
        let n_samples = T::of_usize(per_sample.len());
        let mut whole_panel = Vec::with_capacity(n_methods);
        for m in 0..n_methods {
            let mut alpha = T::zero();
            let mut beta = T::zero();
            for p in &per_sample {
                let (a, b) = p.em_alpha_beta.as_ref().expect("blind mode")[m];
                alpha = alpha + a;
                beta = beta + b;
            }
            whole_panel.push(RatePanel::new(alpha / n_samples, beta / n_samples, gamma)?);
        }

        let mut rho = Vec::with_capacity(per_sample.len());
        let mut sample_panels = Vec::with_capacity(per_sample.len());
        for (p, info) in per_sample.iter().zip(&infos) {
            let ab = p.em_alpha_beta.as_ref().expect("blind mode");
            let mut row = Vec::with_capacity(n_methods);
            let mut panels = Vec::with_capacity(n_methods);
            for (m, &(a, b)) in ab.iter().enumerate() {
                let panel = RatePanel::new(a, b, gamma)?;
                let oc = expected_overlaps(info.size, &whole_panel[m], &panel)?;
                row.push(resilience_from_expectations(&oc));
                panels.push(panel);
            }
            rho.push(row);
            sample_panels.push(panels);
        }

        let (ensemble_rho, ensemble_sample_panels, ensemble_whole_panel) =
            if options.include_ensemble {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                for p in &per_sample {
                    let (a, b) = p.ensemble_alpha_beta.expect("ensemble blind");
                    alpha = alpha + a;
                    beta = beta + b;
                }
                let whole = RatePanel::new(alpha / n_samples, beta / n_samples, gamma)?;
                let mut rho_e = Vec::with_capacity(per_sample.len());
                let mut panels_e = Vec::with_capacity(per_sample.len());
                for (p, info) in per_sample.iter().zip(&infos) {
                    let (a, b) = p.ensemble_alpha_beta.expect("ensemble blind");
                    let panel = RatePanel::new(a, b, gamma)?;
                    let oc = expected_overlaps(info.size, &whole, &panel)?;
                    rho_e.push(resilience_from_expectations(&oc));
                    panels_e.push(panel);
                }
                (Some(rho_e), Some(panels_e), Some(whole))
            } else {
                (None, None, None)
            };

        Some(BlindDetail {
            rho,
            sample_panels,
            whole_panel,
            gamma,
            sample_gammas,
            ensemble_rho,
            ensemble_sample_panels,
            ensemble_whole_panel,
        })
    } else {
        None
    };

    let true_panels = dataset
        .ground_truth()
        .is_some()
        .then(|| {
            per_sample
                .iter()
                .map(|p| p.true_panels.clone().expect("ground truth present"))
                .collect()
        });

    Ok(ResilienceReport {
        methods: detectors.iter().map(|c| c.method.name().to_string()).collect(),
        scheme,
        replicates,
        samples: infos,
        exact,
        ensemble_exact,
        blind,
        true_panels,
    })
}

/// Estimates each detector's resilience under the given scheme.
///
/// In exact mode the whole-dataset run is cached once per method and each
/// replicate compares flag sets directly. In blind mode the whole dataset is
/// never touched: every configured detector runs on each sample, one EM fit
/// per sample estimates the panels, the whole-dataset panel is approximated
/// by the across-replicate mean, and the expected-overlap model yields one
/// resilience value per sample and method.
///
/// The detector slice is taken jointly (rather than one config at a time)
/// because the blind route estimates all methods from one vote matrix; the
/// returned estimates are in detector order.
pub fn estimate_resilience<T: Real>(
    dataset: &Dataset<T>,
    detectors: &[DetectorConfig<T>],
    scheme: SchemeSpec,
    replicates: usize,
    mode: EstimateMode,
    seed: u64,
) -> Result<Vec<ResilienceEstimate<T>>> {
    let report = evaluate_resilience(
        dataset,
        detectors,
        scheme,
        replicates,
        &EvalOptions::new(mode.into()),
        seed,
    )?;
    (0..detectors.len())
        .map(|m| report.method_estimate(m, mode))
        .collect()
}

/// Estimates the resilience of the EM consensus over the given detectors,
/// treated as one black-box method. Exact mode compares the consensus on
/// each sample against the consensus on the whole dataset; blind mode scores
/// the consensus panel through the same expected-overlap model as any other
/// method.
pub fn ensemble_resilience<T: Real>(
    dataset: &Dataset<T>,
    detectors: &[DetectorConfig<T>],
    scheme: SchemeSpec,
    replicates: usize,
    mode: EstimateMode,
    seed: u64,
) -> Result<ResilienceEstimate<T>> {
    let report = evaluate_resilience(
        dataset,
        detectors,
        scheme,
        replicates,
        &EvalOptions::new(mode.into()).with_ensemble(),
        seed,
    )?;
    report.ensemble_estimate(mode)
}
