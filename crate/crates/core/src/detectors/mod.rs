//! The seven detectors and their common driver.
//!
//! Univariate methods (3-sigma, boxplot, MAD, chi-square) run per column and
//! aggregate cell flags into record flags. Multivariate methods
//! (Mahalanobis, k-means, LOF) score whole records and flag the top
//! `top_fraction` share.

pub mod kmeans;
pub mod lof;
pub mod mahalanobis;
pub mod univariate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::data::{
    aggregate_cells, AggregationRule, CellFlags, Dataset, DetectionResult, Scope,
};
use crate::error::{Error, Result};
use crate::samplers::SampleIndex;
use crate::scalar::Real;

/// The detection methods this crate implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ThreeSigma,
    Boxplot,
    ChiSquare,
    Mad,
    Mahalanobis,
    KMeans,
    Lof,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::ThreeSigma,
        Method::Boxplot,
        Method::ChiSquare,
        Method::Mad,
        Method::Mahalanobis,
        Method::KMeans,
        Method::Lof,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ThreeSigma => "three_sigma",
            Method::Boxplot => "boxplot",
            Method::ChiSquare => "chi_square",
            Method::Mad => "mad",
            Method::Mahalanobis => "mahalanobis",
            Method::KMeans => "kmeans",
            Method::Lof => "lof",
        }
    }

    /// Whether the method runs column-by-column (and therefore produces
    /// cell flags).
    pub fn is_univariate(self) -> bool {
        matches!(
            self,
            Method::ThreeSigma | Method::Boxplot | Method::ChiSquare | Method::Mad
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let valid = Method::ALL.map(Method::name).join(", ");
                Error::Config(format!("unknown method {s:?} (valid: {valid})"))
            })
    }
}

/// Full parameterization of one detector run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig<T> {
    pub method: Method,
    /// Share of records the top-fraction methods flag.
    pub top_fraction: T,
    /// Cluster count for k-means.
    pub k_clusters: usize,
    /// Neighborhood size for LOF.
    pub min_pts: usize,
    /// Quantile of chi-squared(1) used as the cutoff.
    pub chi_sq_quantile: T,
    /// Multiplier on the normalized MAD cutoff.
    pub mad_multiplier: T,
    /// Relative ridge added to the covariance diagonal.
    pub ridge_epsilon: T,
    /// How per-cell flags collapse into record flags.
    pub aggregation: AggregationRule,
}

impl<T: Real> DetectorConfig<T> {
    /// A configuration with the defaults: 10% top fraction, 5 clusters,
    /// 10 neighbors, 0.975 quantile, 3.0 MAD multiplier, 1e-8 ridge,
    /// `any` aggregation.
    pub fn new(method: Method) -> Self {
        DetectorConfig {
            method,
            top_fraction: T::of(0.10),
            k_clusters: 5,
            min_pts: 10,
            chi_sq_quantile: T::of(0.975),
            mad_multiplier: T::of(3.0),
            ridge_epsilon: T::of(1e-8),
            aggregation: AggregationRule::Any,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.top_fraction > T::zero() && self.top_fraction <= T::one()) {
            return Err(Error::Config(format!(
                "top_fraction must lie in (0, 1], got {}",
                self.top_fraction
            )));
        }
        if self.k_clusters == 0 {
            return Err(Error::Config("k_clusters must be at least 1".into()));
        }
        if self.min_pts == 0 {
            return Err(Error::Config("min_pts must be at least 1".into()));
        }
        if !(self.chi_sq_quantile > T::zero() && self.chi_sq_quantile < T::one()) {
            return Err(Error::Config(format!(
                "chi_sq_quantile must lie in (0, 1), got {}",
                self.chi_sq_quantile
            )));
        }
        if self.mad_multiplier <= T::zero() {
            return Err(Error::Config(format!(
                "mad_multiplier must be positive, got {}",
                self.mad_multiplier
            )));
        }
        if self.ridge_epsilon <= T::zero() {
            return Err(Error::Config(format!(
                "ridge_epsilon must be positive, got {}",
                self.ridge_epsilon
            )));
        }
        Ok(())
    }

    /// The parameters that actually influenced this method, for provenance.
    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        match self.method {
            Method::ThreeSigma | Method::Boxplot => {
                p.insert("aggregation".into(), self.aggregation.to_string());
            }
            Method::ChiSquare => {
                p.insert("aggregation".into(), self.aggregation.to_string());
                p.insert("chi_sq_quantile".into(), self.chi_sq_quantile.to_string());
            }
            Method::Mad => {
                p.insert("aggregation".into(), self.aggregation.to_string());
                p.insert("mad_multiplier".into(), self.mad_multiplier.to_string());
            }
            Method::Mahalanobis => {
                p.insert("top_fraction".into(), self.top_fraction.to_string());
                p.insert("ridge_epsilon".into(), self.ridge_epsilon.to_string());
            }
            Method::KMeans => {
                p.insert("top_fraction".into(), self.top_fraction.to_string());
                p.insert("k_clusters".into(), self.k_clusters.to_string());
            }
            Method::Lof => {
                p.insert("top_fraction".into(), self.top_fraction.to_string());
                p.insert("min_pts".into(), self.min_pts.to_string());
            }
        }
        p
    }
}

/// Number of records a top-fraction method flags: `ceil(fraction * n)`,
/// clamped to `1..=n`. The tiny subtraction keeps binary float noise (e.g.
/// `0.1 * 50` landing just above 5) from bumping the ceiling to the next
/// integer.
pub(crate) fn top_count(fraction: f64, n: usize) -> usize {
    let raw = (fraction * n as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(n)
}

/// Flags the `count` highest-scoring records; ties broken toward the lower
/// row index.
pub(crate) fn top_flags<T: Real>(scores: &[T], count: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are not NaN")
            .then_with(|| a.cmp(&b))
    });
    let mut flags = vec![false; scores.len()];
    for &i in order.iter().take(count) {
        flags[i] = true;
    }
    flags
}

/// Runs one detector on a dataset (or on a sample of it) and packages the
/// outcome. `seed` only influences k-means, but is recorded for all methods.
pub fn run_detector<T: Real>(
    dataset: &Dataset<T>,
    cfg: &DetectorConfig<T>,
    scope: Option<&SampleIndex>,
    seed: u64,
) -> Result<DetectionResult> {
    cfg.validate()?;
    let restricted;
    let data = match scope {
        Some(sample) => {
            restricted = dataset.restrict(sample)?;
            &restricted
        }
        None => dataset,
    };
    let n = data.n_rows();
    let mut warnings = Vec::new();

    let (record_flags, cell_flags) = if cfg.method.is_univariate() {
        let mut columns = Vec::with_capacity(data.n_cols());
        for j in 0..data.n_cols() {
            let col = data.column(j);
            let det = match cfg.method {
                Method::ThreeSigma => univariate::three_sigma(&col)?,
                Method::Boxplot => univariate::boxplot(&col)?,
                Method::Mad => univariate::mad(&col, cfg.mad_multiplier)?,
                Method::ChiSquare => univariate::chi_square(&col, cfg.chi_sq_quantile)?,
                _ => unreachable!("univariate dispatch"),
            };
            if let Some(w) = det.warning {
                warnings.push(format!("column {}: {w}", data.column_names()[j]));
            }
            columns.push(det.flags);
        }
        let cells = CellFlags::from_columns(&columns, n)?;
        let flags = aggregate_cells(&cells, cfg.aggregation);
        (flags, Some(cells))
    } else {
        let count = top_count(cfg.top_fraction.as_f64(), n);
        let scores = match cfg.method {
            Method::Mahalanobis => mahalanobis::sq_distances(data, cfg.ridge_epsilon)?,
            Method::KMeans => {
                let fit = kmeans::fit(data, cfg.k_clusters, seed)?;
                kmeans::nearest_distances(data, &fit)
            }
            Method::Lof => lof::scores(data, cfg.min_pts)?,
            _ => unreachable!("multivariate dispatch"),
        };
        (top_flags(&scores, count), None)
    };

    DetectionResult::new(
        cfg.method.name(),
        cfg.params(),
        record_flags,
        cell_flags,
        dataset.id(),
        match scope {
            Some(s) => Scope::Sample(s.clone()),
            None => Scope::Whole,
        },
        seed,
        warnings,
    )
}
