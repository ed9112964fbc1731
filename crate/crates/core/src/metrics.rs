//! Classification metrics against ground truth.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Raw confusion-matrix counts. "Positive" means flagged as an outlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    pub fn actual_positives(&self) -> usize {
        self.true_positives + self.false_negatives
    }

    pub fn actual_negatives(&self) -> usize {
        self.false_positives + self.true_negatives
    }
}

/// Tallies predicted flags against ground-truth labels.
pub fn confusion(predicted: &[bool], truth: &[bool]) -> Result<ConfusionCounts> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions against {} truth labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.true_positives += 1,
            (true, false) => c.false_positives += 1,
            (false, true) => c.false_negatives += 1,
            (false, false) => c.true_negatives += 1,
        }
    }
    Ok(c)
}

/// Derived rates; each is absent when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates<T> {
    /// True-positive rate among actual outliers (alpha).
    pub sensitivity: Option<T>,
    /// True-negative rate among actual inliers (beta).
    pub specificity: Option<T>,
    /// Fraction of flags that are real outliers.
    pub precision: Option<T>,
    /// Same quantity as sensitivity, under its retrieval name.
    pub recall: Option<T>,
    /// Harmonic mean of precision and recall; zero when both are zero,
    /// absent when either is absent.
    pub f1: Option<T>,
}

/// Computes rates from confusion counts.
pub fn rates<T: Real>(c: &ConfusionCounts) -> Rates<T> {
    let ratio = |num: usize, den: usize| {
        (den > 0).then(|| T::of_usize(num) / T::of_usize(den))
    };
    let sensitivity = ratio(c.true_positives, c.actual_positives());
    let specificity = ratio(c.true_negatives, c.actual_negatives());
    let precision = ratio(c.true_positives, c.true_positives + c.false_positives);
    let recall = sensitivity;
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) => {
            if p + r > T::zero() {
                Some(T::of(2.0) * p * r / (p + r))
            } else {
                Some(T::zero())
            }
        }
        _ => None,
    };
    Rates {
        sensitivity,
        specificity,
        precision,
        recall,
        f1,
    }
}

/// The (alpha, beta, gamma) triple describing one detector on one dataset:
/// sensitivity, specificity, and the outlier rate of the data itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePanel<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> RatePanel<T> {
    /// Builds a panel, rejecting anything outside `[0, 1]`.
    pub fn new(alpha: T, beta: T, gamma: T) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Domain(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(RatePanel { alpha, beta, gamma })
    }

    /// Measures a detector's panel directly from flags and ground truth.
    /// Absent rates (no outliers, or no inliers, in `truth`) are an error
    /// here because a panel needs all three numbers.
    pub fn measure(predicted: &[bool], truth: &[bool]) -> Result<Self> {
        let c = confusion(predicted, truth)?;
        let r: Rates<T> = rates(&c);
        let alpha = r
            .sensitivity
            .ok_or_else(|| Error::Domain("sensitivity undefined: no true outliers".into()))?;
        let beta = r
            .specificity
            .ok_or_else(|| Error::Domain("specificity undefined: no true inliers".into()))?;
        let gamma = T::of_usize(c.actual_positives()) / T::of_usize(c.total());
        RatePanel::new(alpha, beta, gamma)
    }
}
