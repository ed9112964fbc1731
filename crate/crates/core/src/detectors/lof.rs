//! Local Outlier Factor (Breunig et al.) scores.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// LOF score per record with `k = min_pts`.
///
/// Neighborhoods include every point tied at the k-distance, so they can
/// hold more than `min_pts` members. Duplicate-heavy data can make a local
/// reachability density infinite (zero total reachability); a record whose
/// own lrd is infinite scores exactly 1, and a finite-density record with an
/// infinite-density neighbor scores infinity, which just means "flagged
/// before any finite score".
pub fn scores<T: Real>(ds: &Dataset<T>, min_pts: usize) -> Result<Vec<T>> {
    let n = ds.n_rows();
    if min_pts == 0 {
        return Err(Error::Range("lof needs min_pts >= 1".into()));
    }
    if n <= min_pts {
        return Err(Error::Range(format!(
            "lof needs more than min_pts records, got {n} rows for min_pts = {min_pts}"
        )));
    }

    // Pass 1: k-distance and neighbor set per record. Work in squared
    // distances; the k-th smallest is found by partial selection and the
    // tie-inclusive neighborhood by a scan against it.
    let mut kdist2 = vec![T::zero(); n];
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut scratch: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for (i, kd2_slot) in kdist2.iter_mut().enumerate() {
        scratch.clear();
        let row = ds.row(i);
        for j in 0..n {
            if j != i {
                scratch.push((sq_dist(row, ds.row(j)), j));
            }
        }
        scratch.select_nth_unstable_by(min_pts - 1, |a, b| {
            a.0.partial_cmp(&b.0).expect("distances are not NaN")
        });
        let kd2 = scratch[min_pts - 1].0;
        *kd2_slot = kd2;
        neighbors.push(
            scratch
                .iter()
                .filter_map(|&(d2, j)| (d2 <= kd2).then_some(j))
                .collect(),
        );
    }

    // Pass 2: local reachability density,
    // lrd(i) = |N(i)| / sum_{o in N(i)} max(kdist(o), d(i, o)).
    let lrd: Vec<T> = (0..n)
        .map(|i| {
            let row = ds.row(i);
            let mut total = T::zero();
            for &o in &neighbors[i] {
                let d = sq_dist(row, ds.row(o)).sqrt();
                total = total + d.max(kdist2[o].sqrt());
            }
            if total == T::zero() {
                T::infinity()
            } else {
                T::of_usize(neighbors[i].len()) / total
            }
        })
        .collect();

    // Pass 3: LOF(i) = mean of lrd(o) / lrd(i) over neighbors.
    Ok((0..n)
        .map(|i| {
            if lrd[i] == T::infinity() {
                return T::one();
            }
            let sum: T = neighbors[i].iter().map(|&o| lrd[o]).sum();
            sum / lrd[i] / T::of_usize(neighbors[i].len())
        })
        .collect())
}
