//! Small dense-matrix and log-space helpers.
//!
//! Matrices are row-major `Vec<f64>` of size d×d; everything here is
//! desk-scale (d is a data dimension, not a sample count).

use crate::error::{Error, Result};

/// log(Σ exp(terms)), stable at any magnitude.
///
/// The exponentials are accumulated in ascending order of value, which makes
/// the result invariant under permutation of the terms bit-for-bit.
pub fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut exps: Vec<f64> = terms.iter().map(|&t| (t - max).exp()).collect();
    exps.sort_unstable_by(|a, b| a.total_cmp(b));
    max + exps.iter().sum::<f64>().ln()
}

/// Softmax of `terms`, sharing the permutation-stable normalizer with
/// [`logsumexp`].
pub fn softmax(terms: &[f64]) -> Vec<f64> {
    let lse = logsumexp(terms);
    terms.iter().map(|&t| (t - lse).exp()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Cholesky factor L (lower triangular, row-major) of a symmetric
/// positive-semidefinite matrix. Pivots below `tol` are treated as zero,
/// so rank-deficient covariances (e.g. a point-mass fit) factor cleanly;
/// a negative pivot beyond tolerance is an error.
pub fn cholesky_psd(a: &[f64], d: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), d * d);
    let scale = a.iter().map(|v| v.abs()).fold(0.0_f64, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s < -tol {
                    return Err(Error::SingularCovariance);
                }
                l[i * d + i] = if s > tol { s.sqrt() } else { 0.0 };
            } else if l[j * d + j] > 0.0 {
                l[i * d + j] = s / l[j * d + j];
            } else {
                l[i * d + j] = 0.0;
            }
        }
    }
    Ok(l)
}

/// Strictly positive-definite Cholesky; any zero pivot is an error.
pub fn cholesky_spd(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let l = cholesky_psd(a, d)?;
    for i in 0..d {
        if l[i * d + i] <= 0.0 {
            return Err(Error::SingularCovariance);
        }
    }
    Ok(l)
}

/// y = L x for lower-triangular L.
pub fn lower_tri_matvec(l: &[f64], d: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..=i {
            s += l[i * d + j] * x[j];
        }
        y[i] = s;
    }
    y
}

/// Squared Mahalanobis distance (x-mu)ᵀ Σ⁻¹ (x-mu) via the SPD Cholesky
/// factor of Σ: solve L z = (x-mu) forward, return ‖z‖².
pub fn mahalanobis_sq(l: &[f64], d: usize, x: &[f64], mu: &[f64]) -> f64 {
    let mut z = vec![0.0; d];
    for i in 0..d {
        let mut s = x[i] - mu[i];
        for j in 0..i {
            s -= l[i * d + j] * z[j];
        }
        z[i] = s / l[i * d + i];
    }
    z.iter().map(|v| v * v).sum()
}

/// Sample mean and covariance (denominator n) of rows.
pub fn mean_and_cov(rows: &[&[f64]], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mu = vec![0.0; d];
    for row in rows {
        for (m, v) in mu.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in mu.iter_mut() {
        *m /= n;
    }
    let mut cov = vec![0.0; d * d];
    for row in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += (row[i] - mu[i]) * (row[j] - mu[j]);
            }
        }
    }
    for c in cov.iter_mut() {
        *c /= n;
    }
    (mu, cov)
}
