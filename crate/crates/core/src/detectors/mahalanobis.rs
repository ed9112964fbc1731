//! Mahalanobis-distance detector.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Squared Mahalanobis distance of every record from the sample mean, under
/// the ridge-stabilized sample covariance `Sigma + eps I` with
/// `eps = ridge_epsilon * trace(Sigma) / V`.
///
/// Solved via Cholesky: with `Sigma + eps I = L L^T`, the distance is the
/// squared norm of the forward-substitution solve `L y = x - mu`.
pub fn sq_distances<T: Real>(ds: &Dataset<T>, ridge_epsilon: T) -> Result<Vec<T>> {
    let n = ds.n_rows();
    let v = ds.n_cols();
    if n <= v {
        return Err(Error::IllPosed(format!(
            "mahalanobis needs more rows than columns, got {n} rows for {v} columns"
        )));
    }

    let mut mean = vec![T::zero(); v];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(ds.row(i)) {
            *m = *m + x;
        }
    }
    let n_t = T::of_usize(n);
    for m in &mut mean {
        *m = *m / n_t;
    }

    // Sample covariance, divisor n - 1, row-major v x v.
    let mut cov = vec![T::zero(); v * v];
    for i in 0..n {
        let row = ds.row(i);
        for a in 0..v {
            let da = row[a] - mean[a];
            for b in a..v {
                cov[a * v + b] = cov[a * v + b] + da * (row[b] - mean[b]);
            }
        }
    }
    let denom = T::of_usize(n - 1);
    for a in 0..v {
        for b in a..v {
            let val = cov[a * v + b] / denom;
            cov[a * v + b] = val;
            cov[b * v + a] = val;
        }
    }

    let trace: T = (0..v).map(|a| cov[a * v + a]).sum();
    let ridge = ridge_epsilon * trace / T::of_usize(v);
    for a in 0..v {
        cov[a * v + a] = cov[a * v + a] + ridge;
    }

    let l = cholesky(&cov, v).ok_or_else(|| {
        Error::Numerical("covariance matrix not positive definite even after ridge".into())
    })?;

    let mut out = Vec::with_capacity(n);
    let mut diff = vec![T::zero(); v];
    let mut y = vec![T::zero(); v];
    for i in 0..n {
        let row = ds.row(i);
        for a in 0..v {
            diff[a] = row[a] - mean[a];
        }
        forward_solve(&l, v, &diff, &mut y);
        out.push(y.iter().map(|&t| t * t).sum());
    }
    Ok(out)
}

/// Cholesky factorization of a symmetric matrix (row-major `v x v`);
/// returns the lower-triangular factor, or `None` if the matrix is not
/// positive definite.
fn cholesky<T: Real>(a: &[T], v: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); v * v];
    for i in 0..v {
        for j in 0..=i {
            let mut sum = a[i * v + j];
            for k in 0..j {
                sum = sum - l[i * v + k] * l[j * v + k];
            }
            if i == j {
                if sum <= T::zero() {
                    return None;
                }
                l[i * v + i] = sum.sqrt();
            } else {
                l[i * v + j] = sum / l[j * v + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L` by forward substitution.
fn forward_solve<T: Real>(l: &[T], v: usize, b: &[T], y: &mut [T]) {
    for i in 0..v {
        let mut sum = b[i];
        for k in 0..i {
            sum = sum - l[i * v + k] * y[k];
        }
        y[i] = sum / l[i * v + i];
    }
}
