//! Ornstein-Uhlenbeck reference process.
//!
//! Closed-form kernels of dX = b(m - X)dt + √ε dW on [0, T]:
//! conditional mean and variance, transition log-density, the bridge
//! posterior (the process conditioned on both endpoints), and a plain
//! Euler-Maruyama integrator for cross-checks.
//!
//! Everything stays well defined as b → 0, where the process degenerates
//! to scaled Brownian motion; that limit is taken on an explicit branch
//! because the tuned drift rates of interest sit right next to zero.

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use rand::Rng as _;
use rand_distr::StandardNormal;

/// Reference-process parameters. The diffusion is isotropic, Σ = εI.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OUParams {
    /// Drift (mean-reversion) rate. b = 0 selects the Brownian branch;
    /// negative values are accepted with a warning, the kernels stay valid.
    pub b: f64,
    /// Mean-reversion level, one entry per dimension.
    pub m: Vec<f64>,
    /// Diffusion scale ε > 0.
    pub eps: f64,
    /// Time horizon T > 0.
    pub horizon: f64,
}

/// Kernel quantities of the transition law at a fixed time:
/// mean m_t(x) = m + e^{-bt}(x - m), variance ε σ_t² I with
/// σ_t² = (1 - e^{-2bt}) / (2b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUKernel {
    pub t: f64,
    /// e^{-bt}
    pub mean_coeff: f64,
    /// σ_t², in time units (equals t when b = 0).
    pub sigma2_t: f64,
}

/// Below this value of |b|·t the exact σ_t² expression is 0/0-prone and a
/// series expansion takes over.
const SERIES_THRESHOLD: f64 = 1e-8;

impl OUParams {
    pub fn new(b: f64, m: Vec<f64>, eps: f64, horizon: f64) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if eps <= 0.0 || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "T must be positive, got {horizon}"
            )));
        }
        if !b.is_finite() || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("b and m must be finite".into()));
        }
        if b < 0.0 {
            // Tuned values below zero do occur; the kernel formulas remain
            // valid but the process is mean-repelling, so flag it.
            log::warn!("OU drift rate b = {b} is negative: process is mean-repelling");
        }
        Ok(Self { b, m, eps, horizon })
    }

    /// Parameters with m = m_scale · (1, …, 1).
    pub fn isotropic(b: f64, m_scale: f64, eps: f64, horizon: f64, d: usize) -> Result<Self> {
        Self::new(b, vec![m_scale; d], eps, horizon)
    }

    /// Same process restated on a shorter horizon (for time-shifted bridge
    /// conditioning). Skips validation: the fields are already vetted.
    pub(crate) fn with_horizon(&self, horizon: f64) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    pub fn d(&self) -> usize {
        self.m.len()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Kernel quantities at time t ∈ [0, T].
    pub fn kernel_at(&self, t: f64) -> Result<OUKernel> {
        self.check_time(t)?;
        Ok(self.kernel_unchecked(t))
    }

    fn kernel_unchecked(&self, t: f64) -> OUKernel {
        let b = self.b;
        if b == 0.0 {
            return OUKernel {
                t,
                mean_coeff: 1.0,
                sigma2_t: t,
            };
        }
        let mean_coeff = (-b * t).exp();
        let sigma2_t = if (b * t).abs() < SERIES_THRESHOLD {
            // σ_t² = t - b t² + (2/3) b² t³ + O(b³ t⁴)
            t * (1.0 - b * t * (1.0 - (2.0 / 3.0) * b * t))
        } else {
            (1.0 - (-2.0 * b * t).exp()) / (2.0 * b)
        };
        OUKernel {
            t,
            mean_coeff,
            sigma2_t,
        }
    }

    /// Conditional mean m_t(x) = m + e^{-bt}(x - m).
    pub fn mean_t(&self, kernel: &OUKernel, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if kernel.mean_coeff == 1.0 {
            return Ok(x.to_vec());
        }
        Ok(x.iter()
            .zip(&self.m)
            .map(|(xi, mi)| mi + kernel.mean_coeff * (xi - mi))
            .collect())
    }

    /// log q_t(y | x), the Gaussian transition log-density, for t ∈ (0, T].
    pub fn transition_logpdf(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_time(t)?;
        self.check_dim(x)?;
        self.check_dim(y)?;
        if t == 0.0 {
            return Err(Error::DegenerateKernel { t });
        }
        let kernel = self.kernel_unchecked(t);
        let var = self.eps * kernel.sigma2_t;
        let mean = self.mean_t(&kernel, x)?;
        let sq: f64 = crate::linalg::squared_distance(y, &mean);
        let d = self.d() as f64;
        Ok(-0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * sq / var)
    }

    /// Posterior law of X_t given X_0 = x0 and X_T = x_end: Gaussian with
    /// isotropic variance. Returns (mean, variance).
    ///
    /// With ρ = e^{-b(T-t)} σ_t² / σ_T², the mean is
    /// m_t(x0) + ρ (x_end - m_T(x0)) and the variance
    /// ε σ_t² (1 - ρ e^{-b(T-t)}). The endpoints are pinned exactly.
    pub fn bridge_posterior(&self, t: f64, x0: &[f64], x_end: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_time(t)?;
        self.check_dim(x0)?;
        self.check_dim(x_end)?;
        if t == 0.0 {
            return Ok((x0.to_vec(), 0.0));
        }
        if t == self.horizon {
            return Ok((x_end.to_vec(), 0.0));
        }
        let kern_t = self.kernel_unchecked(t);
        let kern_end = self.kernel_unchecked(self.horizon);
        let decay = (-self.b * (self.horizon - t)).exp();
        let rho = decay * kern_t.sigma2_t / kern_end.sigma2_t;
        let mean_t = self.mean_t(&kern_t, x0)?;
        let mean_end = self.mean_t(&kern_end, x0)?;
        let mean: Vec<f64> = mean_t
            .iter()
            .zip(mean_end.iter())
            .zip(x_end.iter())
            .map(|((mt, me), xe)| mt + rho * (xe - me))
            .collect();
        let var = (self.eps * kern_t.sigma2_t * (1.0 - rho * decay)).max(0.0);
        Ok((mean, var))
    }

    /// Euler-Maruyama integration of dX = drift(t, X) dt + √ε dW on the
    /// uniform grid over [0, T]. The drift callable carries the full drift
    /// (reference part included). Returns n_steps + 1 grid points;
    /// deterministic for a given seed.
    pub fn euler_maruyama<F>(
        &self,
        drift: F,
        x0: &[f64],
        n_steps: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(f64, &[f64]) -> Vec<f64>,
    {
        self.check_dim(x0)?;
        if n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        let mut rng: Rng = rng_from_seed(seed);
        let dt = self.horizon / n_steps as f64;
        let noise_scale = (self.eps * dt).sqrt();
        let mut path = Vec::with_capacity(n_steps + 1);
        let mut x = x0.to_vec();
        path.push(x.clone());
        for step in 0..n_steps {
            let t = step as f64 * dt;
            let b = drift(t, &x);
            if b.len() != self.d() {
                return Err(Error::DimensionMismatch {
                    expected: self.d(),
                    got: b.len(),
                });
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "drift",
                    index: step,
                });
            }
            for (xi, bi) in x.iter_mut().zip(b.iter()) {
                let z: f64 = rng.sample(StandardNormal);
                *xi += bi * dt + noise_scale * z;
            }
            path.push(x.clone());
        }
        Ok(path)
    }
}
