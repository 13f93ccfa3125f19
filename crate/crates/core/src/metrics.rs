//! Distribution-quality metrics: sliced Wasserstein-1, squared MMD with a
//! Gaussian kernel, energy distance, and mode coverage by Mahalanobis
//! thresholding.

use rayon::prelude::*;

use crate::data::{GaussianMode, PointCloud};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::rng_from_seed;
use rand::Rng as _;
use rand_distr::StandardNormal;

/// 1-D Wasserstein-1 between equal-size samples:
/// (1/M) Σ |a_(i) - b_(i)| over order statistics.
pub fn w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("w1_1d sample"));
    }
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "w1_1d requires equal sample counts, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable_by(f64::total_cmp);
    sb.sort_unstable_by(f64::total_cmp);
    let total: f64 = sa.iter().zip(sb.iter()).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.len() as f64)
}

/// Sliced Wasserstein-1: average of [`w1_1d`] over `n_proj` directions
/// drawn uniformly from the unit sphere. Deterministic for a given seed.
pub fn sliced_w1(x: &PointCloud, y: &PointCloud, n_proj: usize, seed: u64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "sliced_w1 requires equal sample counts, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if n_proj == 0 {
        return Err(Error::InvalidParameter("n_proj must be at least 1".into()));
    }
    let d = x.dim();
    let mut rng = rng_from_seed(seed);
    let mut total = 0.0;
    for _ in 0..n_proj {
        let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = linalg::dot(&dir, &dir).sqrt();
        if norm == 0.0 {
            // Astronomically unlikely; resample deterministically by skipping.
            continue;
        }
        for v in dir.iter_mut() {
            *v /= norm;
        }
        let px: Vec<f64> = x.rows().map(|r| linalg::dot(r, &dir)).collect();
        let py: Vec<f64> = y.rows().map(|r| linalg::dot(r, &dir)).collect();
        total += w1_1d(&px, &py)?;
    }
    Ok(total / n_proj as f64)
}

/// Squared maximum mean discrepancy with kernel k(x,y) = exp(-γ‖x-y‖²),
/// as the biased V-statistic E[k(X,X)] + E[k(Y,Y)] - 2 E[k(X,Y)] with all
/// pairs (diagonal included).
pub fn mmd2(x: &PointCloud, y: &PointCloud, gamma: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    if gamma <= 0.0 || gamma.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "kernel width gamma must be positive, got {gamma}"
        )));
    }
    let kxx = mean_kernel(x, x, gamma);
    let kyy = mean_kernel(y, y, gamma);
    let kxy = mean_kernel(x, y, gamma);
    Ok(kxx + kyy - 2.0 * kxy)
}

/// Mean Gaussian-kernel value over all pairs. Rows are reduced in index
/// order so the result does not depend on the parallel schedule.
fn mean_kernel(a: &PointCloud, b: &PointCloud, gamma: f64) -> f64 {
    let rows_b: Vec<&[f64]> = b.rows().collect();
    let row_sums: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let ra = a.row(i);
            rows_b
                .iter()
                .map(|rb| (-gamma * linalg::squared_distance(ra, rb)).exp())
                .sum::<f64>()
        })
        .collect();
    row_sums.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

/// Median-heuristic kernel width: γ = 1 / (2 · median pairwise squared
/// distance) over the pooled clouds.
pub fn median_heuristic_gamma(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let pooled: Vec<&[f64]> = x.rows().chain(y.rows()).collect();
    let n = pooled.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(linalg::squared_distance(pooled[i], pooled[j]));
        }
    }
    if dists.is_empty() {
        return Err(Error::EmptyInput(
            "median heuristic needs at least two points",
        ));
    }
    dists.sort_unstable_by(f64::total_cmp);
    let median = dists[dists.len() / 2];
    if median <= 0.0 {
        return Err(Error::InvalidParameter(
            "median pairwise distance is zero; kernel width undefined".into(),
        ));
    }
    Ok(1.0 / (2.0 * median))
}

/// Energy distance 2 E‖X-Y‖ - E‖X-X'‖ - E‖Y-Y'‖ as the V-statistic over
/// all pairs.
pub fn energy_distance(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let dxy = mean_distance(x, y);
    let dxx = mean_distance(x, x);
    let dyy = mean_distance(y, y);
    Ok(2.0 * dxy - dxx - dyy)
}

fn mean_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    let rows_b: Vec<&[f64]> = b.rows().collect();
    let row_sums: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let ra = a.row(i);
            rows_b
                .iter()
                .map(|rb| linalg::euclidean_distance(ra, rb))
                .sum::<f64>()
        })
        .collect();
    row_sums.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

/// Inverse CDF of the χ²(d) distribution. Exact closed form for d = 2;
/// Wilson-Hilferty cube approximation otherwise.
pub fn chi2_quantile(d: usize, p: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "χ² needs at least one degree of freedom".into(),
        ));
    }
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence must lie in (0, 1), got {p}"
        )));
    }
    if d == 2 {
        return Ok(-2.0 * (1.0 - p).ln());
    }
    let df = d as f64;
    let z = inverse_normal_cdf(p);
    let a = 2.0 / (9.0 * df);
    Ok(df * (1.0 - a + z * a.sqrt()).powi(3))
}

/// Acklam's rational approximation of the standard normal quantile
/// (absolute relative error below 1.2e-9 on (0, 1)).
#[allow(clippy::excessive_precision)]
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Number of modes for which some sample falls inside the Mahalanobis
/// ellipse at the given confidence: min over samples of
/// (x-μ_k)ᵀ Σ_k⁻¹ (x-μ_k) ≤ χ²(d) quantile.
pub fn mode_coverage(x: &PointCloud, modes: &[GaussianMode], confidence: f64) -> Result<usize> {
    if modes.is_empty() {
        return Err(Error::EmptyInput("mode list"));
    }
    let d = x.dim();
    let threshold = chi2_quantile(d, confidence)?;
    let mut covered = 0usize;
    for mode in modes {
        if mode.mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mode.mean.len(),
            });
        }
        let factor = linalg::cholesky_spd(&mode.cov, d)?;
        let hit = x
            .rows()
            .any(|row| linalg::mahalanobis_sq(&factor, d, row, &mode.mean) <= threshold);
        if hit {
            covered += 1;
        }
    }
    Ok(covered)
}

/// One evaluation round of all four metrics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsSample {
    pub sliced_w1: f64,
    pub mmd2: f64,
    pub energy: f64,
    pub covered_modes: f64,
}

/// Mean ± standard deviation over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

fn stat(values: impl Iterator<Item = f64> + Clone) -> MetricStat {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let std = if n > 1.0 {
        (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MetricStat { mean, std }
}

/// Evaluation settings echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsConfig {
    pub n_projections: usize,
    pub kernel_gamma: f64,
    pub confidence: f64,
    pub n_repeats: usize,
}

/// Aggregated metric report over repeated evaluations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub sliced_w1: MetricStat,
    pub mmd2: MetricStat,
    pub energy: MetricStat,
    pub covered_modes: MetricStat,
    pub config: MetricsConfig,
}

impl MetricsReport {
    pub fn from_samples(samples: &[MetricsSample], config: MetricsConfig) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("metric samples"));
        }
        Ok(Self {
            sliced_w1: stat(samples.iter().map(|s| s.sliced_w1)),
            mmd2: stat(samples.iter().map(|s| s.mmd2)),
            energy: stat(samples.iter().map(|s| s.energy)),
            covered_modes: stat(samples.iter().map(|s| s.covered_modes)),
            config,
        })
    }

    /// Rows of (metric name, mean, std) in report order.
    pub fn rows(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("sliced_w1", self.sliced_w1.mean, self.sliced_w1.std),
            ("mmd2", self.mmd2.mean, self.mmd2.std),
            ("energy", self.energy.mean, self.energy.std),
            (
                "covered_modes",
                self.covered_modes.mean,
                self.covered_modes.std,
            ),
        ]
    }
}
