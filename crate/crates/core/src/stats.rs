//! Small univariate statistics used by the detectors.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Arithmetic mean. Caller guarantees a non-empty slice.
pub fn mean<T: Real>(xs: &[T]) -> T {
    debug_assert!(!xs.is_empty());
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Unbiased sample variance (divisor `n - 1`). Caller guarantees `n >= 2`.
pub fn sample_variance<T: Real>(xs: &[T]) -> T {
    debug_assert!(xs.len() >= 2);
    let m = mean(xs);
    let ss = xs
        .iter()
        .map(|&x| {
            let d = x - m;
            d * d
        })
        .sum::<T>();
    ss / T::of_usize(xs.len() - 1)
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_sd<T: Real>(xs: &[T]) -> T {
    sample_variance(xs).sqrt()
}

/// Ascending copy of the input. Values are finite by dataset invariant, so
/// `partial_cmp` cannot fail.
pub fn sorted<T: Real>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values are totally ordered"));
    v
}

/// Quantile of an ascending-sorted slice by linear interpolation: the value
/// at (1-based) position `1 + (n - 1) q`, interpolating between the two
/// nearest order statistics. This matches the common statistical-software
/// default, so quartiles from small worked examples line up.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= n {
        sorted[lo]
    } else {
        sorted[lo] + T::of(frac) * (sorted[lo + 1] - sorted[lo])
    }
}

/// Median (0.5 quantile) of an unsorted slice.
pub fn median<T: Real>(xs: &[T]) -> T {
    quantile_sorted(&sorted(xs), 0.5)
}

/// Quantile of the chi-squared distribution with one degree of freedom.
pub fn chi_squared_1_quantile(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Range(format!(
            "chi-squared quantile level must lie in (0, 1), got {p}"
        )));
    }
    let dist = ChiSquared::new(1.0).expect("df = 1 is valid");
    Ok(dist.inverse_cdf(p))
}
