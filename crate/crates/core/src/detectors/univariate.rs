//! Column-wise detectors: 3-sigma, boxplot, MAD, and chi-square.
//!
//! Each operates on one numeric column and returns a flag per value, plus an
//! optional degeneracy warning when the spread statistic collapses to zero.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats;

/// Flags for one column plus an optional degeneracy warning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDetection {
    pub flags: Vec<bool>,
    pub warning: Option<String>,
}

impl ColumnDetection {
    fn clean(flags: Vec<bool>) -> Self {
        ColumnDetection {
            flags,
            warning: None,
        }
    }

    fn degenerate(n: usize, warning: impl Into<String>) -> Self {
        ColumnDetection {
            flags: vec![false; n],
            warning: Some(warning.into()),
        }
    }
}

fn require_len<T>(col: &[T], min: usize, method: &str) -> Result<()> {
    if col.len() < min {
        return Err(Error::Dimension(format!(
            "{method} needs at least {min} values, got {}",
            col.len()
        )));
    }
    Ok(())
}

/// Flags values farther than three sample standard deviations from the mean.
/// Zero spread flags nothing: every value sits exactly on the mean.
pub fn three_sigma<T: Real>(col: &[T]) -> Result<ColumnDetection> {
    require_len(col, 2, "three_sigma")?;
    let m = stats::mean(col);
    let sd = stats::sample_sd(col);
    if sd == T::zero() {
        return Ok(ColumnDetection::clean(vec![false; col.len()]));
    }
    let limit = T::of(3.0) * sd;
    Ok(ColumnDetection::clean(
        col.iter().map(|&x| (x - m).abs() > limit).collect(),
    ))
}

/// Flags values outside the Tukey fences Q1 - 1.5 IQR and Q3 + 1.5 IQR.
pub fn boxplot<T: Real>(col: &[T]) -> Result<ColumnDetection> {
    require_len(col, 4, "boxplot")?;
    let sorted = stats::sorted(col);
    let q1 = stats::quantile_sorted(&sorted, 0.25);
    let q3 = stats::quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo = q1 - T::of(1.5) * iqr;
    let hi = q3 + T::of(1.5) * iqr;
    Ok(ColumnDetection::clean(
        col.iter().map(|&x| x < lo || x > hi).collect(),
    ))
}

/// Flags values whose absolute deviation from the median exceeds
/// `multiplier * 1.4826 * MAD`. The 1.4826 factor makes the MAD estimate
/// the standard deviation under normality.
pub fn mad<T: Real>(col: &[T], multiplier: T) -> Result<ColumnDetection> {
    require_len(col, 2, "mad")?;
    let med = stats::median(col);
    let deviations: Vec<T> = col.iter().map(|&x| (x - med).abs()).collect();
    let mad = stats::median(&deviations);
    if mad == T::zero() {
        return Ok(ColumnDetection::degenerate(
            col.len(),
            "MAD is zero; no flags raised",
        ));
    }
    let cutoff = multiplier * T::of(1.4826) * mad;
    Ok(ColumnDetection::clean(
        deviations.into_iter().map(|d| d > cutoff).collect(),
    ))
}

/// Flags values whose squared standardized deviation exceeds the given
/// quantile of the chi-squared distribution with one degree of freedom.
pub fn chi_square<T: Real>(col: &[T], quantile: T) -> Result<ColumnDetection> {
    require_len(col, 2, "chi_square")?;
    let m = stats::mean(col);
    let var = stats::sample_variance(col);
    if var == T::zero() {
        return Ok(ColumnDetection::degenerate(
            col.len(),
            "zero variance; no flags raised",
        ));
    }
    let q = T::of(stats::chi_squared_1_quantile(quantile.as_f64())?);
    Ok(ColumnDetection::clean(
        col.iter()
            .map(|&x| {
                let d = x - m;
                d * d / var > q
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sigma_zero_spread_flags_nothing() {
        let r = three_sigma(&[5.0, 5.0, 5.0, 5.0]).unwrap();
        assert!(r.flags.iter().all(|&f| !f));
        assert!(r.warning.is_none());
    }

    #[test]
    fn three_sigma_masking_effect() {
        // A single huge value inflates the sd enough to hide itself:
        // mean = 20, sd ~ 44.72, z(100) ~ 1.79 < 3.
        let r = three_sigma(&[0.0, 0.0, 0.0, 0.0, 100.0]).unwrap();
        assert!(r.flags.iter().all(|&f| !f));
    }

    #[test]
    fn three_sigma_catches_clear_outlier() {
        let mut col = vec![0.0; 100];
        // Alternate small values so the sd stays near 1.
        for (i, v) in col.iter_mut().enumerate() {
            *v = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        col[0] = 50.0;
        let r = three_sigma(&col).unwrap();
        assert!(r.flags[0]);
        assert_eq!(r.flags.iter().filter(|&&f| f).count(), 1);
    }

    #[test]
    fn three_sigma_needs_two_values() {
        assert!(three_sigma(&[1.0]).is_err());
    }

    #[test]
    fn boxplot_worked_example() {
        // Q1 = 2, Q3 = 4, IQR = 2, fences (-1, 7): only 100 sticks out.
        let r = boxplot(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(r.flags, vec![false, false, false, false, true]);
    }

    #[test]
    fn boxplot_constant_column_flags_nothing() {
        let r = boxplot(&[3.0; 6]).unwrap();
        assert!(r.flags.iter().all(|&f| !f));
        assert!(boxplot(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn boxplot_scale_invariance() {
        let base = [-3.0, -1.0, 0.0, 0.5, 1.0, 2.5, 40.0];
        let scaled: Vec<f64> = base.iter().map(|x| x * 7.25).collect();
        assert_eq!(
            boxplot(&base).unwrap().flags,
            boxplot(&scaled).unwrap().flags
        );
    }

    #[test]
    fn mad_degenerate_majority_constant() {
        // Median 1, every deviation except one is 0, so MAD = 0.
        let r = mad(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 100.0], 3.0).unwrap();
        assert!(r.flags.iter().all(|&f| !f));
        assert!(r.warning.is_some());
    }

    #[test]
    fn mad_worked_example() {
        // Median 4.5; the extreme value is the only deviation past
        // 3 * 1.4826 * MAD.
        let r = mad(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 1000.0], 3.0).unwrap();
        assert_eq!(
            r.flags,
            vec![false, false, false, false, false, false, false, true]
        );
        assert!(r.warning.is_none());
    }

    #[test]
    fn mad_shift_invariance() {
        let base = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 1000.0];
        let shifted: Vec<f64> = base.iter().map(|x| x + 1234.5).collect();
        assert_eq!(
            mad(&base, 3.0).unwrap().flags,
            mad(&shifted, 3.0).unwrap().flags
        );
    }

    #[test]
    fn chi_square_degenerate_and_center() {
        let r = chi_square(&[2.0, 2.0, 2.0], 0.975).unwrap();
        assert!(r.flags.iter().all(|&f| !f));
        assert!(r.warning.is_some());

        // A value exactly at the mean has statistic 0 and is never flagged.
        let col = [0.0, 10.0, 5.0, 5.0, 5.0];
        let r = chi_square(&col, 0.975).unwrap();
        assert!(!r.flags[2]);
    }

    #[test]
    fn chi_square_tail_fraction_matches_distribution() {
        // Monte Carlo oracle: on standard normal data the flagged fraction
        // should approach the chi-square(1) tail mass, 0.025 at the default
        // quantile.
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut rng = crate::seed::stream_rng(7, "chi-square-oracle", 0);
        let col: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let r = chi_square(&col, 0.975).unwrap();
        let frac = r.flags.iter().filter(|&&f| f).count() as f64 / col.len() as f64;
        assert!(
            (frac - 0.025).abs() < 0.005,
            "flagged fraction {frac} too far from 0.025"
        );
    }
}
