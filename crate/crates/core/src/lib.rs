//! Outlier detection under subsampling.
//!
//! This crate implements seven classical outlier detectors, three sampling
//! schemes, and the machinery to measure how *resilient* a detector is to
//! sampling: how much the outliers found on a sample overlap with the
//! outliers the same detector finds on the whole dataset, restricted to that
//! sample. Resilience can be computed exactly (when the whole dataset is
//! available) or estimated blindly from samples alone via a Dawid-Skene
//! style EM ensemble over the detectors.
//!
//! Numeric kernels are generic over the scalar type through [`Real`];
//! `f64`-concrete aliases are exported at the crate root.

pub mod data;
pub mod detectors;
pub mod ensemble;
pub mod error;
pub mod metrics;
pub mod resilience;
pub mod samplers;
pub mod scalar;
pub mod seed;
pub mod stats;
pub mod synthgen;

pub use data::{aggregate_cells, AggregationRule, CellFlags, Dataset, DetectionResult, Scope};
pub use detectors::{run_detector, DetectorConfig, Method};
pub use ensemble::{em_fit, em_fit_from, EmOptions, EnsembleModel, LabelMatrix};
pub use error::{Error, Result};
pub use metrics::{confusion, rates, ConfusionCounts, RatePanel, Rates};
pub use resilience::{
    ensemble_resilience, estimate_resilience, evaluate_resilience, expected_overlaps,
    resilience_exact, resilience_from_expectations, BlindDetail, EstimateMode, EvalOptions,
    EvaluationMode, OverlapCounts, ResilienceEstimate, ResilienceReport, SampleInfo,
    SchemeSpec,
};
pub use samplers::{block_sample, partition, random_sample, SampleIndex, Scheme};
pub use scalar::Real;
pub use synthgen::{generate, generate_fig1, OutlierDistribution, SynthSpec};

/// Concrete `f64` dataset, the default working type.
pub type DatasetF64 = Dataset<f64>;
/// Concrete `f64` detector configuration.
pub type DetectorConfigF64 = DetectorConfig<f64>;
/// Concrete `f64` ensemble model.
pub type EnsembleModelF64 = EnsembleModel<f64>;
/// Concrete `f64` rate panel.
pub type RatePanelF64 = RatePanel<f64>;
