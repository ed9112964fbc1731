//! Synthetic bivariate datasets with planted outliers.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::samplers;
use crate::scalar::Real;
use crate::seed;

/// Which planted-outlier distribution to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierDistribution {
    /// A single tight cluster at (4, 0), sd 0.25 per axis.
    Dist1,
    /// Equal-weight mixture of the (4, 0) cluster and one at (0, 6).
    Dist2,
}

impl std::fmt::Display for OutlierDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutlierDistribution::Dist1 => "dist1",
            OutlierDistribution::Dist2 => "dist2",
        })
    }
}

impl std::str::FromStr for OutlierDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dist1" => Ok(OutlierDistribution::Dist1),
            "dist2" => Ok(OutlierDistribution::Dist2),
            other => Err(Error::Config(format!(
                "unknown outlier distribution {other:?} (expected \"dist1\" or \"dist2\")"
            ))),
        }
    }
}

/// Recipe for one synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec<T> {
    /// Total number of records.
    pub n: usize,
    /// Mean of the inlier distribution.
    pub base_mean: (T, T),
    /// Per-axis standard deviations of the inlier distribution.
    pub base_sds: (T, T),
    pub outlier_distribution: OutlierDistribution,
    /// Fraction of records replaced by planted outliers.
    pub rate: T,
    pub seed: u64,
}

impl<T: Real> SynthSpec<T> {
    /// Spec with the standard base distribution: mean (0, 0), sds (1, 2).
    pub fn new(n: usize, outlier_distribution: OutlierDistribution, rate: T, seed: u64) -> Self {
        SynthSpec {
            n,
            base_mean: (T::zero(), T::zero()),
            base_sds: (T::one(), T::of(2.0)),
            outlier_distribution,
            rate,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("synthetic dataset needs n >= 1".into()));
        }
        if !(self.rate >= T::zero() && self.rate < T::one()) {
            return Err(Error::Config(format!(
                "outlier rate must lie in [0, 1), got {}",
                self.rate
            )));
        }
        if self.base_sds.0 <= T::zero() || self.base_sds.1 <= T::zero() {
            return Err(Error::Config("base standard deviations must be positive".into()));
        }
        Ok(())
    }
}

/// Standard deviation of each planted-outlier cluster, both axes.
const OUTLIER_SD: f64 = 0.25;

/// Generates the dataset described by `spec`.
///
/// Exactly `round(rate * n)` records are outliers (a fixed count, not a
/// per-record coin flip), planted at uniformly random row positions;
/// ground truth marks them. Identical specs produce identical bytes.
pub fn generate<T: Real>(spec: &SynthSpec<T>) -> Result<Dataset<T>> {
    spec.validate()?;
    let n = spec.n;
    let n_outliers = (spec.rate.as_f64() * n as f64).round() as usize;

    let mut rng = seed::stream_rng(spec.seed, "synthgen", 0);
    let mut is_outlier = vec![false; n];
    if n_outliers > 0 {
        let position_seed = seed::substream(spec.seed, "synthgen-positions", 0);
        let positions = samplers::random_sample(n, n_outliers, position_seed)?;
        for &i in positions.indices() {
            is_outlier[i] = true;
        }
    }

    let base_x = Normal::new(spec.base_mean.0.as_f64(), spec.base_sds.0.as_f64())
        .expect("validated sds");
    let base_y = Normal::new(spec.base_mean.1.as_f64(), spec.base_sds.1.as_f64())
        .expect("validated sds");
    let cluster_a_x = Normal::new(4.0, OUTLIER_SD).expect("constant");
    let cluster_a_y = Normal::new(0.0, OUTLIER_SD).expect("constant");
    let cluster_b_x = Normal::new(0.0, OUTLIER_SD).expect("constant");
    let cluster_b_y = Normal::new(6.0, OUTLIER_SD).expect("constant");

    let mut values = Vec::with_capacity(2 * n);
    for &out in &is_outlier {
        let (x, y) = if out {
            let use_b = matches!(spec.outlier_distribution, OutlierDistribution::Dist2)
                && rng.random::<bool>();
            if use_b {
                (cluster_b_x.sample(&mut rng), cluster_b_y.sample(&mut rng))
            } else {
                (cluster_a_x.sample(&mut rng), cluster_a_y.sample(&mut rng))
            }
        } else {
            (base_x.sample(&mut rng), base_y.sample(&mut rng))
        };
        values.push(T::of(x));
        values.push(T::of(y));
    }

    let id = format!(
        "synth-{}-n{}-rate{}-seed{}",
        spec.outlier_distribution, n, spec.rate, spec.seed
    );
    Dataset::new(
        id,
        vec!["x1".into(), "x2".into()],
        values,
        Some(is_outlier),
    )
}

/// The 1,500-point motivating dataset: independent normal coordinates with
/// mean (-1, 1) and variances (1.015, 1.035), no ground truth.
pub fn generate_fig1<T: Real>(seed: u64) -> Dataset<T> {
    let mut rng = seed::stream_rng(seed, "synthgen-fig1", 0);
    let x = Normal::new(-1.0, 1.015f64.sqrt()).expect("constant");
    let y = Normal::new(1.0, 1.035f64.sqrt()).expect("constant");
    let mut values = Vec::with_capacity(3000);
    for _ in 0..1500 {
        values.push(T::of(x.sample(&mut rng)));
        values.push(T::of(y.sample(&mut rng)));
    }
    Dataset::new(
        format!("fig1-seed{seed}"),
        vec!["x1".into(), "x2".into()],
        values,
        None,
    )
    .expect("constant-shape dataset")
}
