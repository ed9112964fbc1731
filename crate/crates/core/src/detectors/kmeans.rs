//! K-means clustering used as a distance-based outlier scorer.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed;

const MAX_ITERATIONS: usize = 100;
const RELATIVE_INERTIA_TOL: f64 = 1e-6;

/// A fitted k-means model.
#[derive(Debug, Clone)]
pub struct KMeansFit<T> {
    /// Row-major `k x v` centroid matrix.
    pub centroids: Vec<T>,
    pub k: usize,
    pub n_cols: usize,
    /// Index of the nearest centroid per record.
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the nearest centroid.
    pub inertia: T,
    /// Lloyd iterations actually performed.
    pub iterations: usize,
}

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Nearest centroid per record (ties to the lower centroid index) and the
/// resulting inertia.
fn assign<T: Real>(ds: &Dataset<T>, centroids: &[T], k: usize) -> (Vec<usize>, T) {
    let v = ds.n_cols();
    let mut assignments = Vec::with_capacity(ds.n_rows());
    let mut inertia = T::zero();
    for i in 0..ds.n_rows() {
        let row = ds.row(i);
        let mut best = 0;
        let mut best_d = sq_dist(row, &centroids[0..v]);
        for c in 1..k {
            let d = sq_dist(row, &centroids[c * v..(c + 1) * v]);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        assignments.push(best);
        inertia = inertia + best_d;
    }
    (assignments, inertia)
}

/// k-means++ seeding: first centroid uniform, then each next centroid drawn
/// with probability proportional to squared distance from the chosen set.
/// If every remaining point coincides with a centroid (all weights zero),
/// falls back to a uniform draw among the not-yet-chosen.
fn seed_centroids<T: Real>(ds: &Dataset<T>, k: usize, seed: u64) -> Vec<T> {
    let n = ds.n_rows();
    let v = ds.n_cols();
    let mut rng = seed::stream_rng(seed, "kmeans-seeding", 0);
    let mut chosen_rows = Vec::with_capacity(k);
    let mut is_chosen = vec![false; n];

    let first = rng.random_range(0..n);
    chosen_rows.push(first);
    is_chosen[first] = true;

    // Squared distance to the nearest chosen centroid, in f64 so the
    // weighted draw below is scalar-type independent.
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(ds.row(i), ds.row(first)).as_f64())
        .collect();

    while chosen_rows.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut picked = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > r {
                    picked = Some(i);
                    break;
                }
            }
            // Float round-off guard: fall back to the last positive weight.
            picked.unwrap_or_else(|| {
                d2.iter().rposition(|&w| w > 0.0).expect("total > 0")
            })
        } else {
            let remaining: Vec<usize> = (0..n).filter(|&i| !is_chosen[i]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        chosen_rows.push(next);
        is_chosen[next] = true;
        for (i, slot) in d2.iter_mut().enumerate() {
            let d = sq_dist(ds.row(i), ds.row(next)).as_f64();
            if d < *slot {
                *slot = d;
            }
        }
    }

    let mut centroids = Vec::with_capacity(k * v);
    for &i in &chosen_rows {
        centroids.extend_from_slice(ds.row(i));
    }
    centroids
}

/// Runs Lloyd's algorithm with k-means++ seeding. Stops when the relative
/// inertia change drops below 1e-6 or after 100 iterations. Clusters that
/// lose all their points keep their previous centroid.
pub fn fit<T: Real>(ds: &Dataset<T>, k: usize, seed: u64) -> Result<KMeansFit<T>> {
    let n = ds.n_rows();
    let v = ds.n_cols();
    if n < k {
        return Err(Error::Range(format!(
            "kmeans needs at least k records, got {n} rows for k = {k}"
        )));
    }
    if k == 0 {
        return Err(Error::Range("kmeans needs k >= 1".into()));
    }

    let mut centroids = seed_centroids(ds, k, seed);
    let (mut assignments, mut inertia) = assign(ds, &centroids, k);
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Update step: mean of each cluster, previous centroid if empty.
        let mut sums = vec![T::zero(); k * v];
        let mut counts = vec![0usize; k];
        for (i, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, &x) in sums[c * v..(c + 1) * v].iter_mut().zip(ds.row(i)) {
                *s = *s + x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let ct = T::of_usize(counts[c]);
                for j in 0..v {
                    centroids[c * v + j] = sums[c * v + j] / ct;
                }
            }
        }

        let (new_assignments, new_inertia) = assign(ds, &centroids, k);
        assignments = new_assignments;
        let prev = inertia;
        inertia = new_inertia;
        if prev == T::zero() || (prev - inertia).abs() < T::of(RELATIVE_INERTIA_TOL) * prev {
            break;
        }
    }

    Ok(KMeansFit {
        centroids,
        k,
        n_cols: v,
        assignments,
        inertia,
        iterations,
    })
}

/// Euclidean distance from every record to its nearest centroid.
pub fn nearest_distances<T: Real>(ds: &Dataset<T>, fit: &KMeansFit<T>) -> Vec<T> {
    let v = fit.n_cols;
    (0..ds.n_rows())
        .map(|i| {
            let row = ds.row(i);
            let mut best = sq_dist(row, &fit.centroids[0..v]);
            for c in 1..fit.k {
                let d = sq_dist(row, &fit.centroids[c * v..(c + 1) * v]);
                if d < best {
                    best = d;
                }
            }
            best.sqrt()
        })
        .collect()
}
